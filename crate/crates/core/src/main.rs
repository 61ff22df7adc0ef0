use modenet::cli;

fn main() {
    std::process::exit(cli::run());
}
