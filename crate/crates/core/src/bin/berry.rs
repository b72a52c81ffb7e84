use clap::Parser;

fn main() {
    let args = berry_esseen::cli::Args::parse();
    std::process::exit(berry_esseen::cli::run(&args));
}
