use std::collections::HashMap;
use std::io;

use pathmorph::cli::{run, ENV_PREFIX};

fn main() {
    let env: HashMap<String, String> = std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    let stdin = io::stdin();
    let code = run(
        std::env::args_os(),
        &env,
        &mut stdin.lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
