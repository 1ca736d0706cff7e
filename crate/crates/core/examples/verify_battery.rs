//! The full bound-verification battery, as run by `taylor-sharp verify`.

use taylor_sharp::cli;

fn main() {
    let seed = std::env::args().nth(1).unwrap_or_else(|| "7".into());
    let args = [
        "taylor-sharp",
        "verify",
        "--seed",
        seed.as_str(),
        "--format",
        "csv",
    ];
    let code = cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
