use std::collections::HashMap;
use std::fmt;

/// What a host callback is told about the invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CallbackContext<'a> {
    pub name: &'a str,
    pub t_ms: u64,
    pub scene: &'a str,
    pub region: Option<&'a str>,
    /// The settings `library` path, passed through verbatim.
    pub library: Option<&'a str>,
}

type Callback = Box<dyn FnMut(&CallbackContext<'_>) + Send>;

/// Host-supplied handlers keyed by the names used in `on…` attributes.
#[derive(Default)]
pub struct CallbackRegistry {
    handlers: HashMap<String, Callback>,
}

impl fmt::Debug for CallbackRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.handlers.keys().collect();
        names.sort();
        f.debug_struct("CallbackRegistry").field("handlers", &names).finish()
    }
}

impl CallbackRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, f: impl FnMut(&CallbackContext<'_>) + Send + 'static) {
        self.handlers.insert(name.into(), Box::new(f));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.handlers.contains_key(name)
    }

    /// Runs the handler if one is registered; returns whether it ran.
    pub fn invoke(&mut self, ctx: &CallbackContext<'_>) -> bool {
        match self.handlers.get_mut(ctx.name) {
            Some(h) => {
                h(ctx);
                true
            }
            None => false,
        }
    }
}
