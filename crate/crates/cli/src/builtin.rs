//! Scenarios shipped with the binary.

pub struct Builtin {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! builtin {
    ($name:literal) => {
        Builtin {
            name: $name,
            source: include_str!(concat!("../scenarios/", $name, ".json")),
        }
    };
}

pub const BUILTINS: &[Builtin] = &[
    builtin!("consensus-line4"),
    builtin!("formation-triangle"),
    builtin!("pinned-consensus"),
    builtin!("sign-cycle-3"),
    builtin!("sign-cycle-4"),
    builtin!("sign-cycle-5"),
    builtin!("constant-cycle"),
];

/// Looks up `name`, or the family member `name-n` when `n` is given.
pub fn find(name: &str, n: Option<usize>) -> Option<&'static Builtin> {
    let key = match n {
        Some(n) => format!("{name}-{n}"),
        None => name.to_string(),
    };
    BUILTINS.iter().find(|b| b.name == key)
}
