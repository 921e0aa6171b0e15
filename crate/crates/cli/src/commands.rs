use std::path::Path;

use pontryagin::colligation::{
    index_preservation_check, krylov_report, realize_from_taylor, unitary_similarity,
    weak_similarity, Colligation, Similarity, SystemMetric,
};
use pontryagin::example::{counterexample, monomial};
use pontryagin::indefinite::Tolerances;
use pontryagin::io::{SystemFile, TaylorFile};
use pontryagin::julia::{embedding_corner_error, julia_embedding};
use pontryagin::matrix::spectral_norm;
use pontryagin::products::{
    cascade, kl_factorize_system, obstruction_controllable, obstruction_observable,
    obstruction_simple, stability_classify, FactorMode,
};
use pontryagin::schur::{
    boundary_behavior, defect, kl_factorize_function, negative_squares_estimate, TransferFunction,
};
use pontryagin::{Error, Result};
use serde_json::json;

use crate::report::Report;
use crate::{Check, Cli, Command, Mode, SimilarityMode};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify { .. } => "classify",
        Command::FactorKl { .. } => "factor-kl",
        Command::Product { .. } => "product",
        Command::Negsq { .. } => "negsq",
        Command::JuliaEmbed { .. } => "julia-embed",
        Command::Defect { .. } => "defect",
        Command::Stability { .. } => "stability",
        Command::Realize { .. } => "realize",
        Command::Similar { .. } => "similar",
        Command::ExampleCounter { .. } => "example-counter",
    }
}

pub fn run(cli: &Cli) -> Report {
    let mut ctx = Context {
        cli,
        report: Report::new(command_name(&cli.command)),
    };
    if let Err(e) = ctx.dispatch() {
        ctx.report.fail(&e);
    }
    ctx.report
}

struct Context<'a> {
    cli: &'a Cli,
    report: Report,
}

impl Context<'_> {
    /// Defaults, then overrides from the first input file, then flags.
    fn tolerances(&mut self, file: Option<&SystemFile>) -> Result<Tolerances> {
        let mut tol =
            file.map_or_else(Tolerances::default, |f| f.tolerances(Tolerances::default()));
        if let Some(t) = self.cli.tol {
            tol.metric_tol = t;
            tol.psd_tol = t / 10.0;
            tol.rank_tol = t / 100.0;
        }
        if let Some(n) = self.cli.samples {
            tol.disc_samples = n;
            tol.boundary_samples = 4 * n;
        }
        if let Some(s) = self.cli.seed {
            tol.seed = s;
        }
        tol.validate()?;
        self.report.tolerances = Some(tol);
        Ok(tol)
    }

    fn load_system(&mut self, path: &Path) -> Result<SystemFile> {
        let text = self.report.read_input(path)?;
        SystemFile::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn save(&mut self, name: &str, file: SystemFile) -> Result<()> {
        let Some(dir) = &self.cli.out else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{name}.json"));
        file.save(&path)?;
        self.report.record_output(path);
        Ok(())
    }

    fn save_text(&mut self, name: &str, text: &str) -> Result<()> {
        let Some(dir) = &self.cli.out else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.report.record_output(path);
        Ok(())
    }

    fn dispatch(&mut self) -> Result<()> {
        if self.cli.out.is_none() && produces_files(&self.cli.command) {
            self.report
                .note("constructed systems are not saved without --out");
        }
        match &self.cli.command {
            Command::Classify { path } => self.classify(path),
            Command::FactorKl { path, mode } => self.factor_kl(path, *mode),
            Command::Product {
                first,
                second,
                check,
            } => self.product(first, second, *check),
            Command::Negsq { path } => self.negsq(path),
            Command::JuliaEmbed { path } => self.julia_embed(path),
            Command::Defect { path } => self.defect(path),
            Command::Stability { path } => self.stability(path),
            Command::Realize { path } => self.realize(path),
            Command::Similar {
                first,
                second,
                kind,
            } => self.similar(first, second, *kind),
            Command::ExampleCounter { alpha, a } => self.example_counter(*alpha, *a),
        }
    }

    fn classify(&mut self, path: &Path) -> Result<()> {
        let file = self.load_system(path)?;
        let tol = self.tolerances(Some(&file))?;
        let sys = file.to_colligation()?;
        let class = sys.classify(&tol)?;
        self.report.verdict("metric", class.metric);
        self.report.verdict("controllable", class.controllable);
        self.report.verdict("observable", class.observable);
        self.report.verdict("simple", class.simple);
        self.report.verdict("minimal", class.minimal);
        self.report.verdict("bicontraction", class.bicontraction);
        self.report
            .residual("metric_defect", class.operator.defect_norm);
        self.report
            .certificate("state_inertia", [sys.state().pos(), sys.state().neg()]);
        self.report.certificate("operator", &class.operator);
        let k = krylov_report(&sys, &tol)?;
        self.report.certificate(
            "krylov",
            json!({
                "controllable_dim": k.controllable.dim(),
                "observable_dim": k.observable.dim(),
                "simple_dim": k.simple.dim(),
                "controllable_perp": k.controllable_perp_class,
                "observable_perp": k.observable_perp_class,
                "simple_perp": k.simple_perp_class,
            }),
        );
        if class.metric.is_passive() {
            let sk = index_preservation_check(&sys, &tol)?;
            self.report.verdict("index_preserving", sk.index_preserving);
            self.report.certificate("negative_squares", &sk.estimate);
            if !sk.cross_validated {
                self.report.inconsistent(format!(
                    "Krylov complements say index_preserving = {} but the kernel estimate is {:?} with κ = {}",
                    sk.index_preserving, sk.estimate.kernel_estimate, sk.kappa
                ));
            }
        } else {
            self.report
                .note("index preservation is only decided for passive systems");
        }
        Ok(())
    }

    fn factor_kl(&mut self, path: &Path, mode: Mode) -> Result<()> {
        let file = self.load_system(path)?;
        let tol = self.tolerances(Some(&file))?;
        let s = file.to_transfer_function()?;
        let f = kl_factorize_function(&s, &tol)?;
        self.report.verdict("degree", f.degree);
        self.report.verdict("right_route", f.right.route);
        self.report.verdict("left_route", f.left.route);
        self.report
            .residual("right_reconstruction", f.right.reconstruction_error);
        self.report
            .residual("left_reconstruction", f.left.reconstruction_error);
        self.report.certificate("right", &f.right);
        self.report.certificate("left", &f.left);
        let (schur, blaschke, side, tag) = match mode {
            Mode::Right => (&f.s_r, &f.b_r, &f.right, "right"),
            Mode::Left => (&f.s_l, &f.b_l, &f.left, "left"),
        };
        let cert = serde_json::to_value(side).expect("side reports serialize");
        self.save(
            &format!("{tag}_schur_factor"),
            SystemFile::from_transfer_function(schur, None).with_certificates(cert.clone()),
        )?;
        self.save(
            &format!("{tag}_blaschke_factor"),
            SystemFile::from_transfer_function(blaschke, None).with_certificates(cert),
        )?;

        let Some(sys) = s.colligation() else {
            self.report
                .verdict("system_factorization", "not_applicable");
            self.report.note(
                "the input has no state metric, so only the function-level factorization applies",
            );
            return Ok(());
        };
        let system_mode = match mode {
            Mode::Right => FactorMode::Right,
            Mode::Left => FactorMode::Left,
        };
        match kl_factorize_system(sys, system_mode, &tol) {
            Ok(split) => {
                self.report.verdict("system_factorization", "ok");
                self.report.verdict("system_degree", split.degree());
                self.report
                    .residual("system_similarity", split.similarity.max_residual());
                if split.degree() != f.degree {
                    self.report.inconsistent(format!(
                        "system factorization has degree {} but the function factorization has degree {}",
                        split.degree(),
                        f.degree
                    ));
                }
                let cert = json!({ "mode": split.mode, "similarity_residual": split.similarity.max_residual() });
                self.save(
                    &format!("{tag}_outer_system"),
                    SystemFile::from_colligation(&split.outer, None)
                        .with_certificates(cert.clone()),
                )?;
                self.save(
                    &format!("{tag}_blaschke_inverse_system"),
                    SystemFile::from_colligation(&split.blaschke_inverse, None)
                        .with_certificates(cert),
                )?;
            }
            Err(e) if e.is_input_error() => {
                self.report
                    .verdict("system_factorization", "not_applicable");
                self.report
                    .note(format!("system-level factorization in {tag} mode: {e}"));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn product(&mut self, first: &Path, second: &Path, check: Check) -> Result<()> {
        let (f1, f2) = (self.load_system(first)?, self.load_system(second)?);
        let tol = self.tolerances(Some(&f1))?;
        let (s1, s2) = (f1.to_colligation()?, f2.to_colligation()?);
        let prod = cascade(&s1, &s2)?;
        let obstruction = match check {
            Check::Obs => obstruction_observable(&s1, &s2, &tol)?,
            Check::Cont => obstruction_controllable(&s1, &s2, &tol)?,
            Check::Simple => obstruction_simple(&s1, &s2, &tol)?,
        };
        self.report.verdict("obstruction_kind", obstruction.kind);
        self.report
            .verdict("obstruction_dimension", obstruction.dimension);
        self.report.verdict("holds", obstruction.holds());
        self.report
            .residual("oracle_agreement", obstruction.agreement_residual);
        self.report.certificate("obstruction", &obstruction);
        let class = prod.classify(&tol)?;
        self.report.verdict("product_metric", class.metric);
        if obstruction.krylov_dimension != obstruction.taylor_dimension {
            self.report.inconsistent(format!(
                "Krylov dimension {} differs from Taylor dimension {}",
                obstruction.krylov_dimension, obstruction.taylor_dimension
            ));
        }
        let cert = serde_json::to_value(&obstruction).expect("obstruction reports serialize");
        self.save(
            "product",
            SystemFile::from_colligation(&prod, None).with_certificates(cert),
        )
    }

    fn negsq(&mut self, path: &Path) -> Result<()> {
        let file = self.load_system(path)?;
        let tol = self.tolerances(Some(&file))?;
        let s = file.to_transfer_function()?;
        let est = negative_squares_estimate(&s, &tol)?;
        self.report.verdict("kernel_estimate", est.kernel_estimate);
        self.report
            .verdict("pole_multiplicity", est.pole_multiplicity);
        self.report.verdict("agreement", est.agreement);
        self.report.certificate("negative_squares", &est);
        match est.kernel_estimate {
            Some(k) if k != est.pole_multiplicity => self.report.inconsistent(format!(
                "kernel estimate {k} differs from the disc pole count {}",
                est.pole_multiplicity
            )),
            None => self
                .report
                .note("the negative eigenvalue count did not stabilize within the sampling budget"),
            _ => {}
        }
        Ok(())
    }

    fn julia_embed(&mut self, path: &Path) -> Result<()> {
        let file = self.load_system(path)?;
        let tol = self.tolerances(Some(&file))?;
        let sys = file.to_colligation()?;
        let emb = julia_embedding(&sys, &tol)?;
        let class = emb.classify(&tol)?;
        let corner = embedding_corner_error(&sys, &emb, &tol)?;
        self.report.verdict("embedded_metric", class.metric);
        self.report.verdict("input_dim", emb.input_dim());
        self.report.verdict("output_dim", emb.output_dim());
        self.report.residual("corner_transfer", corner);
        self.report
            .residual("metric_defect", class.operator.defect_norm);
        if class.metric != SystemMetric::Conservative {
            self.report
                .inconsistent("the embedded system is not conservative");
        }
        let cert = json!({ "corner_transfer": corner, "embedded_metric": class.metric });
        self.save(
            "embedding",
            SystemFile::from_colligation(&emb, None).with_certificates(cert),
        )
    }

    fn defect(&mut self, path: &Path) -> Result<()> {
        let file = self.load_system(path)?;
        let tol = self.tolerances(Some(&file))?;
        let s = file.to_transfer_function()?;
        let b = boundary_behavior(&s, &tol)?;
        self.report.verdict("contractive", b.contractive);
        self.report.verdict("inner", b.inner);
        self.report.verdict("co_inner", b.co_inner);
        self.report.verdict("bi_inner", b.bi_inner);
        self.report.residual("max_boundary_sigma", b.max_sigma);
        if !b.note.is_empty() {
            self.report.note(b.note.clone());
        }
        let d = defect(&s, &tol)?;
        self.report.verdict("scalar", d.scalar);
        self.report.verdict("phi_zero", d.phi_zero);
        self.report.verdict("psi_zero", d.psi_zero);
        self.report
            .residual("defect_boundary_fit", d.max_boundary_residual);
        self.report.certificate("phi", &d.phi);
        self.report.certificate("psi", &d.psi);
        self.report
            .certificate("min_root_modulus", d.min_root_modulus);
        if !d.note.is_empty() {
            self.report.note(d.note.clone());
        }
        if d.phi_zero != b.inner || d.psi_zero != b.co_inner {
            self.report.inconsistent(
                "the defect zero-tests disagree with the boundary inner/co-inner flags",
            );
        }
        self.save_text("boundary.csv", &b.to_csv())
    }

    fn stability(&mut self, path: &Path) -> Result<()> {
        let file = self.load_system(path)?;
        let tol = self.tolerances(Some(&file))?;
        let sys = file.to_colligation()?;
        let st = stability_classify(&sys, &tol)?;
        self.report.verdict("class", st.class);
        self.report.verdict("classes", &st.classes);
        self.report.verdict("c0_dot", st.c0_dot);
        self.report.verdict("c_dot0", st.c_dot0);
        self.report.verdict("c00", st.c00);
        self.report
            .residual("plus_restriction_radius", st.plus_restriction_radius);
        self.report
            .residual("dual_restriction_radius", st.dual_restriction_radius);
        self.report.certificate("stability", &st);
        if !st.note.is_empty() {
            self.report.note(st.note.clone());
        }
        Ok(())
    }

    fn realize(&mut self, path: &Path) -> Result<()> {
        let text = self.report.read_input(path)?;
        let taylor = TaylorFile::from_json(&text)?;
        let tol = self.tolerances(None)?;
        let coeffs = taylor.matrices()?;
        let r = realize_from_taylor(&coeffs, taylor.order_bound, &tol)?;
        let mismatch = coeffs
            .iter()
            .enumerate()
            .map(|(k, h)| spectral_norm(&(r.markov(k) - h)))
            .fold(0.0, f64::max);
        self.report.verdict("state_dim", r.state_dim());
        self.report.residual("taylor_mismatch", mismatch);
        let scale = coeffs.iter().map(spectral_norm).fold(1.0, f64::max);
        if mismatch > tol.metric_tol * scale {
            self.report
                .inconsistent("the realization does not reproduce the given coefficients");
        }
        let cert = json!({ "taylor_mismatch": mismatch, "coefficients_used": coeffs.len() });
        self.save(
            "realization",
            SystemFile::from_bare(&r, None).with_certificates(cert),
        )
    }

    fn similar(&mut self, first: &Path, second: &Path, kind: SimilarityMode) -> Result<()> {
        let (f1, f2) = (self.load_system(first)?, self.load_system(second)?);
        let tol = self.tolerances(Some(&f1))?;
        let (s1, s2) = (f1.to_colligation()?, f2.to_colligation()?);
        let result = match kind {
            SimilarityMode::Unitary => match unitary_similarity(&s1, &s2, &tol)? {
                Similarity::Found(r) => Some(r),
                Similarity::NotFound(reason) => {
                    self.report.note(reason);
                    None
                }
            },
            SimilarityMode::Weak => Some(weak_similarity(&s1, &s2, &tol)?),
        };
        self.report.verdict("similar", result.is_some());
        if let Some(r) = result {
            self.report.residual("similarity", r.max_residual());
            self.report.residual("condition", r.condition);
            self.report.certificate("similarity", &r);
        }
        Ok(())
    }

    fn example_counter(&mut self, alpha: num_complex::Complex64, power: usize) -> Result<()> {
        let tol = self.tolerances(None)?;
        let a = monomial(power)?;
        let c = counterexample(alpha, &a, &tol)?;
        self.report.certificate("alpha", [alpha.re, alpha.im]);
        self.report.certificate("inner_degree", power);
        self.report.verdict(
            "observability_obstruction_dimension",
            c.observable.dimension,
        );
        self.report.verdict(
            "controllability_obstruction_dimension",
            c.controllable.dimension,
        );
        self.report
            .verdict("cascade_observable", c.observable.dimension == 0);
        self.report.verdict(
            "adjoint_cascade_controllable",
            c.controllable.dimension == 0,
        );
        self.report
            .verdict("left_factor_state_dim", c.left_system.state_dim());
        self.report
            .verdict("cascade_state_dim", c.cascade.state_dim());
        self.report.residual(
            "observable_oracle_agreement",
            c.observable.agreement_residual,
        );
        self.report.residual(
            "controllable_oracle_agreement",
            c.controllable.agreement_residual,
        );
        self.report.certificate("observable", &c.observable);
        self.report.certificate("controllable", &c.controllable);
        for r in [&c.observable, &c.controllable] {
            if r.krylov_dimension != r.taylor_dimension {
                self.report.inconsistent(format!(
                    "{:?}: Krylov dimension {} differs from Taylor dimension {}",
                    r.kind, r.krylov_dimension, r.taylor_dimension
                ));
            }
        }
        let systems: [(&str, &Colligation); 4] = [
            ("blaschke", &c.blaschke),
            ("blaschke_inverse", &c.blaschke_inverse),
            ("left_factor", &c.left_system),
            ("cascade", &c.cascade),
        ];
        for (name, sys) in systems {
            self.save(name, SystemFile::from_colligation(sys, Some(name)))?;
        }
        self.save("function", bare_file(&c.function, "function"))?;
        Ok(())
    }
}

fn bare_file(s: &TransferFunction, name: &str) -> SystemFile {
    SystemFile::from_transfer_function(s, Some(name))
}

fn produces_files(c: &Command) -> bool {
    !matches!(
        c,
        Command::Classify { .. }
            | Command::Negsq { .. }
            | Command::Stability { .. }
            | Command::Similar { .. }
    )
}
