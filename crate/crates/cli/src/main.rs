use std::io::Write;

fn main() {
    let result = siglik_cli::run(std::env::args_os());
    // Ignore write errors such as a closed pipe.
    let _ = std::io::stdout().write_all(result.stdout.as_bytes());
    let _ = std::io::stderr().write_all(result.stderr.as_bytes());
    std::process::exit(result.exit_code);
}
