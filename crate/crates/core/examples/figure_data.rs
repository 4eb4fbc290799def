//! Drives the command-line front end in-process to produce the data series of
//! a preset figure, here the mean success probability against the threshold.

fn main() {
    let args = ["hetnet-meta", "figure", "--id", "m1-vs-theta", "--points", "5"];
    let code = hetnet_meta::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
