use std::panic;

fn main() {
    panic::set_hook(Box::new(|info| {
        let msg = info
            .payload()
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| info.payload().downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown failure".into());
        eprintln!("internal error: {msg}");
    }));
    let code = panic::catch_unwind(|| muskat_cli::run(std::env::args_os())).unwrap_or(5);
    std::process::exit(code);
}
