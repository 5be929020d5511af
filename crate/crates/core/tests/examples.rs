// Every example runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));
            #[test]
            fn runs() {
                main().unwrap();
            }
        }
    };
}

example!(jet_evaluation);
example!(metric_and_levi);
example!(contact_volume);
example!(kohn_laplacian);
example!(sphere_sharpness);
example!(fubini_study);
example!(ellipsoid_normal_form);
example!(rayleigh_ritz);
