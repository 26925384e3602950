//! Lists the built-in targets with their dimension and evaluation window.

use sdkde::distributions::{preset, preset_names};

fn main() -> sdkde::Result<()> {
    for info in preset_names() {
        let d = preset(info.name)?;
        let window: Vec<String> = d.window().iter().map(|(lo, hi)| format!("[{lo:.2}, {hi:.2}]")).collect();
        println!("{:<14} d={} {:<46} {}", info.name, d.dim(), info.description, window.join(" x "));
    }
    Ok(())
}
