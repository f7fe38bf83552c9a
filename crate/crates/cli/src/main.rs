use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use factorkde::copula_kde::fit_pair;
use factorkde::io::{read_table, write_matrix, write_table, Table};
use factorkde::{
    compute_proxy_with, fit_factor_with, pseudo_observations, rmsd, run_study, sample_one_factor,
    scree_eigenvalues, CopulaFamily, Error, ExperimentConfig, FactorOptions, FamilySpec, KernelSpec,
    OneFactorModel, ProxyOptions, UniformMatrix,
};
use ndarray::Axis;

#[derive(Parser)]
#[command(name = "factorkde", version, about = "Kernel estimation of one-factor copula densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo study described by a JSON config.
    McStudy {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate from a homogeneous one-factor copula model.
    Simulate {
        #[arg(long)]
        family: String,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the latent factor values.
        #[arg(long)]
        latent_out: Option<PathBuf>,
    },
    /// Latent factor proxy: z_bar, v_hat, w_hat per row.
    Proxy {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        auto_orient: bool,
    },
    /// Bivariate copula density of two columns on a regular grid.
    PairDensity {
        #[command(flatten)]
        input: Input,
        /// Two columns, by header name or 1-based position.
        #[arg(long, value_delimiter = ',', required = true)]
        cols: Vec<String>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factor copula density of the first k columns at given points.
    FactorDensity {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
        /// CSV with one k-vector per row.
        #[arg(long)]
        eval: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = factorkde::factor::DEFAULT_QUAD_NODES)]
        quad_nodes: usize,
        #[arg(long)]
        auto_orient: bool,
    },
    /// Eigenvalues of the Spearman correlation matrix, descending.
    Scree {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Root mean squared difference between two density columns.
    Rmsd {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "density")]
        column: String,
    },
}

#[derive(Args)]
struct Input {
    /// Data CSV with a header row; rows are observations.
    #[arg(long = "in")]
    path: PathBuf,
    /// Treat the input as copula-scale data in (0, 1) and skip the kernel
    /// CDF transform.
    #[arg(long)]
    already_uniform: bool,
}

impl Input {
    fn load(&self) -> Result<(Vec<String>, UniformMatrix), Error> {
        let Table { headers, values } = read_table(&self.path)?;
        let u = if self.already_uniform {
            UniformMatrix::from_open_unit(values)?
        } else {
            pseudo_observations(&values, KernelSpec::Quartic)?
        };
        Ok((headers, u))
    }
}

fn column_index(headers: &[String], key: &str) -> Result<usize, Error> {
    if let Some(i) = headers.iter().position(|h| h == key) {
        return Ok(i);
    }
    match key.parse::<usize>() {
        Ok(i) if i >= 1 && i <= headers.len() => Ok(i - 1),
        _ => Err(Error::Config(format!("no column `{key}`"))),
    }
}

fn column_of(table: &Table, name: &str) -> Result<Vec<f64>, Error> {
    let j = column_index(&table.headers, name)?;
    Ok(table.values.column(j).to_vec())
}

enum Outcome {
    Done,
    Partial,
}

fn run(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::McStudy { config, out } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if out.is_some() {
                cfg.output = out;
            }
            let report = run_study(&cfg)?;
            report.write_outputs()?;
            println!("estimator,rmse,mae,sd,bias,reps");
            for r in &report.summary {
                println!("{},{:.6},{:.6},{:.6},{:.6},{}", r.estimator, r.rmse, r.mae, r.sd, r.bias, r.reps);
            }
            if report.is_partial() {
                eprintln!("{} of {} replications failed", report.failures.len(), cfg.reps);
                return Ok(Outcome::Partial);
            }
        }
        Command::Simulate { family, theta, n, d, seed, out, latent_out } => {
            let fam = CopulaFamily::try_from(&FamilySpec { family, theta })
                .map_err(|e| Error::Config(e.to_string()))?;
            let model = OneFactorModel::homogeneous(fam, d).map_err(|e| Error::Config(e.to_string()))?;
            let (u, latent) = sample_one_factor(&model, n, seed)?;
            write_matrix(&out, "u", u.view())?;
            if let Some(path) = latent_out {
                write_table(&path, &["v0"], latent.chunks(1))?;
            }
        }
        Command::Proxy { input, out, auto_orient } => {
            let (_, u) = input.load()?;
            let p = compute_proxy_with(&u, ProxyOptions { auto_orient })?;
            let rows: Vec<[f64; 3]> = (0..u.n()).map(|i| [p.z_bar[i], p.v_hat[i], p.w_hat[i]]).collect();
            write_table(&out, &["z_bar", "v_hat", "w_hat"], rows.iter().map(|r| &r[..]))?;
        }
        Command::PairDensity { input, cols, grid, out } => {
            if cols.len() != 2 {
                return Err(Error::Config(format!("--cols takes two columns, got {}", cols.len())));
            }
            let (headers, u) = input.load()?;
            let a = column_index(&headers, &cols[0])?;
            let b = column_index(&headers, &cols[1])?;
            if grid < 2 {
                return Err(Error::Config("grid needs at least 2 points".into()));
            }
            let fit = fit_pair(&u.column_vec(a), &u.column_vec(b))?;
            let rows: Vec<[f64; 3]> = fit.eval_grid(grid).into_iter().map(|(x, y, c)| [x, y, c]).collect();
            write_table(&out, &["u", "v", "density"], rows.iter().map(|r| &r[..]))?;
        }
        Command::FactorDensity { input, k, eval, out, quad_nodes, auto_orient } => {
            let (_, u) = input.load()?;
            if k < 2 || k > u.d() {
                return Err(Error::Config(format!("need 2 <= k <= {}, got {k}", u.d())));
            }
            let opts = FactorOptions {
                quad_nodes,
                proxy: ProxyOptions { auto_orient },
                ..Default::default()
            };
            let fit = fit_factor_with(&u, k, &opts)?;
            let points = read_table(&eval)?.values;
            if points.ncols() != k {
                return Err(Error::Config(format!(
                    "evaluation points have {} columns, expected {k}",
                    points.ncols()
                )));
            }
            let pts: Vec<Vec<f64>> = points.axis_iter(Axis(0)).map(|r| r.to_vec()).collect();
            let dens = fit.eval_many(&pts)?;
            let mut headers: Vec<String> = (1..=k).map(|j| format!("u{j}")).collect();
            headers.push("density".into());
            let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
            let rows: Vec<Vec<f64>> = pts
                .into_iter()
                .zip(dens)
                .map(|(mut p, c)| {
                    p.push(c);
                    p
                })
                .collect();
            write_table(&out, &refs, rows.iter().map(Vec::as_slice))?;
        }
        Command::Scree { input, out } => {
            let (_, u) = input.load()?;
            let eig = scree_eigenvalues(&u)?;
            match out {
                Some(path) => {
                    let rows: Vec<[f64; 2]> =
                        eig.iter().enumerate().map(|(i, &e)| [(i + 1) as f64, e]).collect();
                    write_table(&path, &["index", "eigenvalue"], rows.iter().map(|r| &r[..]))?;
                }
                None => {
                    println!("index,eigenvalue");
                    for (i, e) in eig.iter().enumerate() {
                        println!("{},{e:.10}", i + 1);
                    }
                }
            }
        }
        Command::Rmsd { a, b, column } => {
            let x = column_of(&read_table(&a)?, &column)?;
            let y = column_of(&read_table(&b)?, &column)?;
            println!("{:.10e}", rmsd(&x, &y)?);
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
