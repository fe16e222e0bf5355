use clap::Args;

#[derive(Debug, Default, Args)]
pub struct DomainsArgs {
    /// Builtin name (unit_disk, inner_spiral, comb, sector_chain, disk_chain,
    /// half_circle_spiral) or a TOML domain file.
    #[arg(long)]
    pub domain: Option<String>,
    /// Grid spacing, e.g. 1/128.
    #[arg(long)]
    pub h: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct CauchyArgs {
    #[arg(long)]
    pub domain: Option<String>,
    /// Integrand expression.
    #[arg(long)]
    pub f: Option<String>,
    /// `grid` or a CSV file with columns re,im.
    #[arg(long)]
    pub targets: Option<String>,
    /// Grid spacing or comma-separated refinement ladder.
    #[arg(long)]
    pub h: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct BezoutArgs {
    #[arg(long)]
    pub domain: Option<String>,
    /// Comma-separated generators.
    #[arg(long)]
    pub f: Option<String>,
    /// poly or pou.
    #[arg(long)]
    pub method: Option<String>,
    /// Largest polynomial degree tried.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub dump_fields: bool,
}

#[derive(Debug, Default, Args)]
pub struct CoronaArgs {
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub f: Option<String>,
    /// one, g5, g6 or g12.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// Comma-separated x_j with sum x_j f_j = g (g5, g6).
    #[arg(long)]
    pub x: Option<String>,
    /// Comma-separated h_j (g12).
    #[arg(long = "h-list")]
    pub h_list: Option<String>,
    /// Comma-separated refinement ladder.
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub dump_fields: bool,
}

#[derive(Debug, Default, Args)]
pub struct DivideArgs {
    #[arg(long)]
    pub f: Option<String>,
    /// Expression or `sector_corner_conj`.
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub power: Option<u32>,
    /// C0, A0, C1, A1 or Dbar1.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub domain: Option<String>,
    /// Expected outcome (PASS, FAIL or INCONCLUSIVE); a mismatch exits with 3.
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct FaaArgs {
    /// Print the coefficient table of order n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Run the oracle battery.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Default, Args)]
pub struct LconnArgs {
    #[arg(long)]
    pub domain: Option<String>,
    /// Base point as re,im.
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// bounded, growing or inconclusive.
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct TaylorArgs {
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub domain: Option<String>,
    /// Also tabulate the disk chain difference quotients for this many disks.
    #[arg(long)]
    pub quotient_demo: Option<usize>,
}
