//! Every example runs to completion.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run().expect(concat!(stringify!($name), " example failed"));
        }
    };
}

example!(heat_kernel);
example!(heat_semigroup);
example!(blowup_run);
example!(global_certification);
example!(phase_sweep);
example!(decay_fit);
example!(oracles);
