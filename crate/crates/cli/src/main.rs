use std::io::Write;

fn main() {
    let (code, text) = rankone_cli::run(std::env::args_os());
    if code == 0 {
        print!("{text}");
        let _ = std::io::stdout().flush();
    } else {
        eprint!("{text}");
    }
    std::process::exit(code);
}
