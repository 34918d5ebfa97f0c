//! Mode dispatch: computes what a [`RunConfig`] asks for and writes it out.

use std::path::PathBuf;

use xxrelay::cluster::{critical_values, lazy_reports, middle_pair_scan, refine_report, ClusterReport, ClusterSpec};
use xxrelay::field::{all_pairs, FieldEngine};
use xxrelay::relay::{group_mean, negligibility_gaps, partial_sums, refine_extrema, time_extrema};
use xxrelay::search::{bisectrix_crossing, boundary_scan, BisectrixCrossing, CrossingSettings};
use xxrelay::state::{symmetric_params, InitialStateParams};
use xxrelay::stats::{optimal_time, Axis, SignalAverager};
use xxrelay::sweep::{cluster_point, relay_extrema_point, sweep, ClusterQuantity};
use xxrelay::ChainConfig;

use crate::config::{Figure, Mode, RunConfig};
use crate::error::CliError;
use crate::output::{self, num, Artifacts, MANIFEST_FILE};

/// What a finished run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub registration_time: Option<f64>,
    pub files: Vec<String>,
}

/// Execute a validated configuration, on a dedicated pool when `threads` is set.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    config.validate()?;
    match config.threads {
        Some(k) => rayon::ThreadPoolBuilder::new().num_threads(k).build()?.install(|| execute(config)),
        None => execute(config),
    }
}

struct Context<'a> {
    config: &'a RunConfig,
    chain: ChainConfig,
    t_reg: Option<f64>,
    engine: Option<FieldEngine>,
    out: Artifacts,
}

fn execute(config: &RunConfig) -> Result<RunSummary, CliError> {
    let mut ctx = Context {
        config,
        chain: config.chain_config()?,
        t_reg: config.chain.registration_time,
        engine: None,
        out: Artifacts::create(&config.output_dir)?,
    };
    match config.mode {
        Mode::OptimalTime => ctx.optimal_time()?,
        Mode::Field => ctx.field()?,
        Mode::Relay => ctx.relay()?,
        Mode::Clusters => ctx.clusters()?,
        Mode::Critical => ctx.critical()?,
        Mode::Lifetime => ctx.lifetime_sweeps("lifetime")?,
        Mode::Boundary => ctx.boundary("boundary")?,
        Mode::Crossing => ctx.crossing("crossing")?,
        Mode::ReproduceFigure => ctx.figure(config.figure.expect("validated"))?,
    }
    let files = ctx.out.files().to_vec();
    let text = output::manifest(config, ctx.t_reg, &files)?;
    ctx.out.text(MANIFEST_FILE, &text)?;
    Ok(RunSummary {
        output_dir: config.output_dir.clone(),
        registration_time: ctx.t_reg,
        files: ctx.out.files().to_vec(),
    })
}

fn cluster_id(spec: &ClusterSpec) -> String {
    format!("P{}_{}", spec.size, spec.first)
}

fn report_row(r: &ClusterReport, params: &InitialStateParams) -> Vec<String> {
    vec![
        r.spec.size.to_string(),
        r.spec.first.to_string(),
        num(params.sender.lambda),
        num(params.sender.a1),
        num(r.p_max),
        num(r.t_peak),
        num(r.t_l),
        num(r.t_r),
        num(r.lifetime),
    ]
}

impl Context<'_> {
    fn registration_time(&mut self) -> Result<f64, CliError> {
        if let Some(t) = self.t_reg {
            return Ok(t);
        }
        let g = &self.config.grids;
        let t = optimal_time(&self.chain, g.horizon, g.dt, g.nodes)?.t;
        self.t_reg = Some(t);
        Ok(t)
    }

    fn engine(&mut self) -> Result<&FieldEngine, CliError> {
        if self.engine.is_none() {
            let t = self.registration_time()?;
            let chain = self.chain.with_registration_time(t)?;
            self.engine = Some(FieldEngine::for_registration(&chain, self.config.grids.dt)?);
        }
        Ok(self.engine.as_ref().expect("just built"))
    }

    fn point(&self) -> Result<InitialStateParams, CliError> {
        Ok(symmetric_params(self.config.analysis.lambda, self.config.analysis.alpha)?)
    }

    fn optimal_time(&mut self) -> Result<(), CliError> {
        let g = &self.config.grids;
        let opt = optimal_time(&self.chain, g.horizon, g.dt, g.nodes)?;
        let avg = SignalAverager::new(&self.chain, g.nodes)?;
        let times = xxrelay::field::uniform_grid(g.horizon, g.dt)?;
        let values = avg.on_grid(&times)?;
        self.t_reg = Some(opt.t);
        self.out.csv("signal.csv", &["t", "signal"], times.iter().zip(&values).map(|(t, s)| vec![num(*t), num(*s)]))?;
        self.out.csv(
            "optimal_time.csv",
            &["t_reg", "signal", "coarse_t"],
            [vec![num(opt.t), num(opt.value), num(opt.coarse_t)]],
        )
    }

    fn field(&mut self) -> Result<(), CliError> {
        let params = self.point()?;
        let field = self.engine()?.field(&params)?;
        let pairs = all_pairs(field.n());
        let rows = (0..field.times().len()).flat_map(|k| {
            let field = &field;
            pairs.iter().map(move |&(i, j)| {
                vec![num(field.times()[k]), i.to_string(), j.to_string(), num(field.value(i, j, k))]
            })
        });
        self.out.csv("field.csv", &["t", "i", "j", "C"], rows)
    }

    fn relay(&mut self) -> Result<(), CliError> {
        let params = self.point()?;
        let engine = self.engine()?;
        let field = engine.field(&params)?;
        let profile = partial_sums(&field)?;
        let t_end = *engine.times().last().expect("non-empty grid");
        let coarse = time_extrema(&profile, t_end)?;
        let refined = refine_extrema(engine, &params, &coarse, t_end)?;
        let gaps = negligibility_gaps(&refined);
        let times = profile.times().to_vec();
        let m_max = profile.max_separation();
        let rows: Vec<Vec<String>> = (0..times.len())
            .flat_map(|k| {
                let profile = &profile;
                let t = times[k];
                (1..=m_max).map(move |m| {
                    vec![num(t), m.to_string(), num(profile.group_mean(m)[k]), num(profile.partial_sum(m)[k])]
                })
            })
            .collect();
        self.out.csv("relay.csv", &["t", "m", "C_m", "S_m"], rows)?;
        self.out.csv(
            "extrema.csv",
            &["m", "s_max", "t_max", "s_min", "t_min"],
            refined.iter().map(|e| vec![e.m.to_string(), num(e.max), num(e.t_at_max), num(e.min), num(e.t_at_min)]),
        )?;
        let opt = |g: Option<f64>| g.map(num).unwrap_or_default();
        self.out.csv(
            "gaps.csv",
            &["m", "max_gap", "min_gap"],
            gaps.iter().map(|g| vec![g.m.to_string(), opt(g.max_gap), opt(g.min_gap)]),
        )
    }

    fn clusters(&mut self) -> Result<(), CliError> {
        let params = self.point()?;
        let specs = self.config.cluster_specs()?;
        let engine = self.engine()?;
        let reports = lazy_reports(engine, &params, &specs)?
            .iter()
            .map(|r| refine_report(engine, &params, r))
            .collect::<Result<Vec<_>, _>>()?;
        self.out.csv(
            "clusters.csv",
            &["M", "i", "lambda", "alpha", "p_max", "t_peak", "t_l", "t_r", "lifetime"],
            reports.iter().map(|r| report_row(r, &params)),
        )
    }

    fn critical(&mut self) -> Result<(), CliError> {
        let specs = self.config.cluster_specs()?;
        let (lambdas, alphas) = (self.config.lambdas()?, self.config.alphas()?);
        let threshold = self.config.analysis.threshold;
        let scans = critical_values(self.engine()?, &specs, &lambdas, &alphas, threshold)?;
        let text = |defined: bool, v: f64| if defined { num(v) } else { String::new() };
        self.out.csv(
            "critical.csv",
            &["M", "i", "lambda_c", "alpha_c", "defined"],
            scans.iter().map(|s| {
                let v = s.values;
                vec![
                    s.spec.size.to_string(),
                    s.spec.first.to_string(),
                    text(v.defined, v.lambda_c),
                    text(v.defined, v.alpha_c),
                    v.defined.to_string(),
                ]
            }),
        )
    }

    /// Mean ± deviation of a per-state quantity along both parameter axes.
    fn both_axes<F>(&mut self, stem: &str, ylabel: &str, ids: &[String], f: F) -> Result<(), CliError>
    where
        F: Fn(&FieldEngine, f64, f64) -> xxrelay::Result<Vec<f64>> + Sync,
    {
        let (lambdas, alphas) = (self.config.lambdas()?, self.config.alphas()?);
        let nodes = self.config.grids.nodes;
        let engine = self.engine()?;
        let over_alpha = sweep(Axis::Alpha, &lambdas, nodes, |l, a| f(engine, l, a))?;
        let over_lambda = sweep(Axis::Lambda, &alphas, nodes, |l, a| f(engine, l, a))?;
        let (fa, fl) = (format!("{stem}_alpha.csv"), format!("{stem}_lambda.csv"));
        self.out.sweep_csv(&fa, "lambda", ids, &over_alpha)?;
        self.out.sweep_csv(&fl, "alpha", ids, &over_lambda)?;
        self.out.text(&format!("{stem}_alpha.gp"), &output::sweep_script(&fa, "lambda", ylabel, ids))?;
        self.out.text(&format!("{stem}_lambda.gp"), &output::sweep_script(&fl, "alpha", ylabel, ids))
    }

    fn lifetime_sweeps(&mut self, stem: &str) -> Result<(), CliError> {
        let specs = self.config.cluster_specs()?;
        let ids: Vec<String> = specs.iter().map(|s| cluster_id(s).replacen('P', "T", 1)).collect();
        self.both_axes(stem, "lifetime", &ids, |e, l, a| cluster_point(e, &specs, ClusterQuantity::Lifetime, l, a))
    }

    fn peak_sweep(&mut self, stem: &str, axis: Axis, specs: &[ClusterSpec]) -> Result<(), CliError> {
        let ids: Vec<String> = specs.iter().map(cluster_id).collect();
        let (values, axis_name) = match axis {
            Axis::Alpha => (self.config.lambdas()?, "lambda"),
            Axis::Lambda => (self.config.alphas()?, "alpha"),
        };
        let nodes = self.config.grids.nodes;
        let engine = self.engine()?;
        let rows = sweep(axis, &values, nodes, |l, a| cluster_point(engine, specs, ClusterQuantity::PeakMean, l, a))?;
        let data = format!("{stem}.csv");
        self.out.sweep_csv(&data, axis_name, &ids, &rows)?;
        self.out.text(&format!("{stem}.gp"), &output::sweep_script(&data, axis_name, "P_max", &ids))
    }

    fn relay_sweep(&mut self, stem: &str, axis: Axis) -> Result<(), CliError> {
        let n = self.chain.n();
        let ids: Vec<String> = (1..n).map(|m| format!("S{m}_max")).chain((1..n).map(|m| format!("S{m}_min"))).collect();
        let (values, axis_name) = match axis {
            Axis::Alpha => (self.config.lambdas()?, "lambda"),
            Axis::Lambda => (self.config.alphas()?, "alpha"),
        };
        let nodes = self.config.grids.nodes;
        let engine = self.engine()?;
        let rows = sweep(axis, &values, nodes, |l, a| relay_extrema_point(engine, l, a))?;
        let data = format!("{stem}.csv");
        self.out.sweep_csv(&data, axis_name, &ids, &rows)?;
        let shown: Vec<String> = [1, 2, 3, n - 1]
            .into_iter()
            .filter(|&m| m < n)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .flat_map(|m| [format!("S{m}_max"), format!("S{m}_min")])
            .collect();
        self.out.text(&format!("{stem}.gp"), &output::sweep_script(&data, axis_name, "S_m", &shown))
    }

    fn crossing_result(&mut self) -> Result<BisectrixCrossing, CliError> {
        let a = &self.config.analysis;
        let settings = CrossingSettings {
            lambdas: self.config.lambdas()?,
            alphas: self.config.alphas()?,
            tolerance: a.tolerance,
            threshold: a.threshold,
        };
        Ok(bisectrix_crossing(self.engine()?, &settings)?)
    }

    fn write_crossing(&mut self, stem: &str, c: &BisectrixCrossing) -> Result<(), CliError> {
        self.out.csv(
            &format!("{stem}.csv"),
            &["lambda", "alpha", "peak"],
            [vec![num(c.lambda), num(c.alpha), num(c.peak)]],
        )
    }

    fn crossing(&mut self, stem: &str) -> Result<(), CliError> {
        let c = self.crossing_result()?;
        self.write_crossing(stem, &c)?;
        self.out.csv(
            &format!("{stem}_scan.csv"),
            &["lambda", "max_margin"],
            c.scan.iter().map(|(l, m)| vec![num(*l), num(*m)]),
        )
    }

    fn boundary(&mut self, stem: &str) -> Result<(), CliError> {
        let lambdas = self.config.lambdas()?;
        let alphas = self.config.alphas()?;
        let a = self.config.analysis.clone();
        let mut curve = boundary_scan(self.engine()?, &lambdas, &lambdas, &alphas, a.angle_mode, a.threshold)?;
        let c = self.crossing_result()?;
        curve.crossing = Some((c.lambda, c.alpha));
        let nr = curve.lambdas_r.len();
        let rows: Vec<Vec<String>> = (0..curve.entangled.len())
            .map(|idx| {
                vec![
                    num(curve.lambdas_r[idx % nr]),
                    num(curve.lambdas_s[idx / nr]),
                    u8::from(curve.entangled[idx]).to_string(),
                ]
            })
            .collect();
        let (grid, points, crossing) =
            (format!("{stem}.csv"), format!("{stem}_points.csv"), format!("{stem}_crossing.csv"));
        self.out.csv(&grid, &["lambda_r", "lambda_s", "entangled"], rows)?;
        self.out.csv(&points, &["lambda_r", "lambda_s"], curve.points.iter().map(|(r, s)| vec![num(*r), num(*s)]))?;
        self.write_crossing(&format!("{stem}_crossing"), &c)?;
        if stem == "fig1" {
            self.out.text("fig1.gp", &output::fig1_script(&grid, &points, &crossing))?;
        }
        Ok(())
    }

    fn figure(&mut self, figure: Figure) -> Result<(), CliError> {
        let n = self.chain.n();
        let eps = self.config.analysis.epsilon;
        let sized = |sizes: &[usize]| -> Result<Vec<ClusterSpec>, CliError> {
            let mut specs = Vec::new();
            for &m in sizes.iter().filter(|&&m| m <= n) {
                for i in 1..=n + 1 - m {
                    specs.push(ClusterSpec::new(m, i, eps, n)?);
                }
            }
            Ok(specs)
        };
        match figure {
            Figure::Fig1 => self.boundary("fig1"),
            Figure::Fig2 => {
                let params = self.point()?;
                let field = self.engine()?.field(&params)?;
                let (c1, c2) = (group_mean(&field, 1)?, group_mean(&field, 2.min(n - 1))?);
                let rows: Vec<Vec<String>> =
                    field.times().iter().enumerate().map(|(k, t)| vec![num(*t), num(c1[k]), num(c2[k])]).collect();
                self.out.csv("fig2.csv", &["t", "C1", "C2"], rows)?;
                self.out.text("fig2.gp", &output::fig2_script("fig2.csv"))
            }
            Figure::Fig3 => self.relay_sweep("fig3", Axis::Alpha),
            Figure::Fig4 => self.relay_sweep("fig4", Axis::Lambda),
            Figure::Fig5 => {
                let (lambdas, alphas) = (self.config.lambdas()?, self.config.alphas()?);
                let scan = middle_pair_scan(self.engine()?, &lambdas, &alphas)?;
                let edge = format!("C{}{}_max", scan.edge_pair.0, scan.edge_pair.1);
                let middle = format!("C{}{}_max", scan.middle_pair.0, scan.middle_pair.1);
                let nl = lambdas.len();
                let rows: Vec<Vec<String>> = (0..scan.edge.len())
                    .map(|idx| {
                        vec![num(lambdas[idx % nl]), num(alphas[idx / nl]), num(scan.edge[idx]), num(scan.middle[idx])]
                    })
                    .collect();
                self.out.csv("fig5.csv", &["lambda", "alpha", &edge, &middle], rows)?;
                self.out.text("fig5.gp", &output::fig5_script("fig5.csv", &edge, &middle))
            }
            Figure::Fig6 => {
                let specs = sized(&[3, 4, 5])?;
                self.peak_sweep("fig6", Axis::Alpha, &specs)
            }
            Figure::Fig7 => {
                let specs = sized(&[3, 4, 5])?;
                self.peak_sweep("fig7", Axis::Lambda, &specs)
            }
            Figure::Fig8 => {
                let mut sizes = vec![6, n];
                sizes.dedup();
                let specs = sized(&sizes)?;
                if specs.is_empty() {
                    return Err(CliError::Config(format!("fig8 needs clusters of 6 spins, chain has {n}")));
                }
                self.peak_sweep("fig8_alpha", Axis::Alpha, &specs)?;
                self.peak_sweep("fig8_lambda", Axis::Lambda, &specs)
            }
            Figure::Fig9 => {
                let specs = sized(&[3, 4, 5])?;
                let ids: Vec<String> = specs.iter().map(|s| cluster_id(s).replacen('P', "T", 1)).collect();
                self.both_axes("fig9", "lifetime", &ids, |e, l, a| {
                    cluster_point(e, &specs, ClusterQuantity::Lifetime, l, a)
                })
            }
        }
    }
}
