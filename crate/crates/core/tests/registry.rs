use crflab_core::registry::{Named, Registry};

trait Greeter: Named {
    fn greet(&self) -> String;
}

struct Hello;
struct Hola;

impl Named for Hello {
    fn name(&self) -> &'static str {
        "hello"
    }
}

impl Greeter for Hello {
    fn greet(&self) -> String {
        "hi".into()
    }
}

impl Named for Hola {
    fn name(&self) -> &'static str {
        "hello"
    }
}

impl Greeter for Hola {
    fn greet(&self) -> String {
        "hola".into()
    }
}

#[test]
fn lookup_and_unknown() {
    let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
    assert!(reg.is_empty());
    reg.register(Box::new(Hello));
    assert_eq!(reg.get("hello").unwrap().greet(), "hi");
    let err = reg.get("bye").err().unwrap();
    assert_eq!(err.known, "hello");
    assert_eq!(err.to_string(), "unknown greeter `bye` (known: hello)");
    assert_eq!(reg.names(), vec!["hello"]);
}

#[test]
fn later_registration_replaces() {
    let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
    reg.register(Box::new(Hello)).register(Box::new(Hola));
    assert_eq!(reg.len(), 1);
    assert_eq!(reg.get("hello").unwrap().greet(), "hola");
}
