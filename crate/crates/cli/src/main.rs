use clap::Parser;
use freeprod_cli::{main_with, Options};

fn main() {
    std::process::exit(main_with(&Options::parse()));
}
