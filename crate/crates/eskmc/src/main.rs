use clap::Parser;

fn main() {
    // die quietly on a closed pipe (e.g. `eskmc reduce ... | head`)
    // instead of panicking mid-print
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = eskmc::cli::Cli::parse();
    std::process::exit(eskmc::cli::run(cli));
}
