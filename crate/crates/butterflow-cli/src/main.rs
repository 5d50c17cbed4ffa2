//! Command-line front end: rate regions, trace simulation, secrecy audits,
//! cut-set bounds, and the exhaustive encoder search.
//!
//! Every command is deterministic for a fixed configuration and seed; wall
//! clock timings go to stderr so stdout and output files can be compared
//! byte for byte across runs.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use butterflow::gfq::{uniform_packet, Packet};
use butterflow::netgraph::{Network, Variant};
use butterflow::regions::{boundary_vertices, capacity_region};
use butterflow::schemes::{execute, plan, trace_csv};
use butterflow::secaudit::{
    audit_with_budget, search_range, EncoderFamily, DEFAULT_AUDIT_BUDGET, FAMILY_COUNT,
};
use butterflow::Error;

use config::{ConfigFile, Flags, Settings};

#[derive(Parser)]
#[command(
    name = "butterflow",
    about = "Two-unicast butterfly networks: rate regions, coding schemes, secrecy audits",
    version
)]
struct Cli {
    /// TOML run configuration; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file for commands that write one (region.csv / trace.csv)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for message and key sampling
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Field size, a prime
    #[arg(long, global = true)]
    q: Option<u32>,

    /// Demand perfect secrecy against single-edge eavesdroppers
    #[arg(long, global = true)]
    secure: bool,

    /// Network shape: butterfly1, colocated-sources, colocated-sinks, butterfly2
    #[arg(long, global = true)]
    variant: Option<String>,

    /// Rate of the first session, "p" or "p/q"
    #[arg(long, global = true)]
    rate1: Option<String>,

    /// Rate of the second session
    #[arg(long, global = true)]
    rate2: Option<String>,

    /// Override one edge capacity, LABEL=VALUE (repeatable)
    #[arg(long = "cap", global = true)]
    caps: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the rate region's constraints and write its corner points
    Region,
    /// Build a transmission plan, run one block, write the edge trace
    Simulate,
    /// Enumerate all message and key values and test per-edge secrecy
    Audit,
    /// Print cut-set bounds next to the closed-form region
    Bounds,
    /// Scan single-letter binary encodings of the split butterfly
    Impossibility {
        /// Scan only the first N of the 2^24 families
        #[arg(long)]
        limit: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::MalformedNetwork(_) | Error::FieldMismatch(_) => 2,
        Error::InfeasibleRate { .. } => 3,
        Error::SecureButterfly1 => 4,
        Error::AuditBudgetExceeded { .. } => 5,
        Error::UnsupportedVariant { .. } => 6,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let flags = Flags {
        variant: cli.variant.clone(),
        q: cli.q,
        secure: cli.secure,
        seed: cli.seed,
        rate1: cli.rate1.clone(),
        rate2: cli.rate2.clone(),
        out: cli.out.clone(),
        caps: cli.caps.clone(),
    };
    let settings = config::merge(&file, &flags)?;

    match cli.command {
        Command::Region => cmd_region(&settings),
        Command::Simulate => cmd_simulate(&settings),
        Command::Audit => cmd_audit(&settings),
        Command::Bounds => cmd_bounds(&settings),
        Command::Impossibility { limit } => cmd_impossibility(limit),
    }
}

fn write_out(settings: &Settings, default_name: &str, contents: &str) -> Result<PathBuf, Error> {
    let path = settings
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name));
    std::fs::write(&path, contents)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_region(settings: &Settings) -> Result<(), Error> {
    let caps = settings.capacities()?;
    let variant = caps.variant();
    println!(
        "variant: {}, secure: {}",
        variant.as_str(),
        settings.secure
    );
    if settings.secure && variant == Variant::Butterfly1 {
        println!("note: {}", Error::SecureButterfly1);
    }
    let region = capacity_region(&caps, settings.secure);
    println!("constraints:");
    for constraint in &region.constraints {
        println!("  {constraint}");
    }
    let corners = boundary_vertices(&region)?;
    let listed: Vec<String> = corners
        .iter()
        .map(|p| format!("({}, {})", p.r1, p.r2))
        .collect();
    println!("corners: {}", listed.join(" "));

    let mut csv = String::from("r1,r2\n");
    for p in &corners {
        csv.push_str(&format!("{},{}\n", p.r1, p.r2));
    }
    let path = write_out(settings, "region.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build_plan(settings: &Settings) -> Result<butterflow::schemes::TransmissionPlan, Error> {
    let caps = settings.capacities()?;
    let rate = settings.rates()?;
    plan(&caps, rate, settings.secure, settings.field)
}

fn cmd_simulate(settings: &Settings) -> Result<(), Error> {
    let p = build_plan(settings)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let draw = |count: usize, rng: &mut ChaCha8Rng| -> Vec<Packet> {
        (0..count)
            .map(|_| uniform_packet(p.field, 1, rng))
            .collect()
    };
    let w1 = draw(p.k1, &mut rng);
    let w2 = draw(p.k2, &mut rng);
    let trace = execute(&p, &w1, &w2, &mut rng)?;
    println!(
        "variant: {}, secure: {}, field: GF({}), block: {} uses, packets: {} + {}",
        p.variant.as_str(),
        p.secure,
        p.field.q(),
        p.block_n,
        p.k1,
        p.k2
    );
    let ok = butterflow::schemes::verify_reliability(&trace);
    println!("decode: {}", if ok { "ok" } else { "MISMATCH" });
    let path = write_out(settings, "trace.csv", &trace_csv(&trace))?;
    println!("wrote {}", path.display());
    if !ok {
        return Err(Error::Internal("sinks failed to decode".into()));
    }
    Ok(())
}

fn audit_budget() -> Result<u64, Error> {
    match std::env::var("BUTTERFLOW_BUDGET") {
        Ok(text) => text.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("BUTTERFLOW_BUDGET must be an integer, got {text:?}"))
        }),
        Err(_) => Ok(DEFAULT_AUDIT_BUDGET),
    }
}

fn cmd_audit(settings: &Settings) -> Result<(), Error> {
    let p = build_plan(settings)?;
    let budget = audit_budget()?;
    let started = Instant::now();
    let verdict = audit_with_budget(&p, budget)?;
    eprintln!("audit took {:?}", started.elapsed());
    println!("states enumerated: {}", verdict.states);
    for edge in &verdict.edges {
        println!(
            "edge {}: {}, I(W; X) = {:.6} bits",
            edge.label,
            if edge.factorizes {
                "message-independent"
            } else {
                "LEAKS"
            },
            edge.mutual_information_bits
        );
    }
    match verdict.first_failure {
        None => println!("verdict: PASS"),
        Some(label) => println!("verdict: FAIL (first leaking edge: {label})"),
    }
    Ok(())
}

fn cmd_bounds(settings: &Settings) -> Result<(), Error> {
    let caps = settings.capacities()?;
    let net = Network::from_template(&caps);
    println!("cut-set bounds:");
    for bound in butterflow::netgraph::cutset_bounds(&net)? {
        println!("  {} <= {}", bound.rate, bound.bound.value());
    }
    if caps.variant() == Variant::Butterfly1 {
        let gns = butterflow::netgraph::gns_sum_bound(&net)?;
        println!("relay-decoding sum bound: R1 + R2 <= {gns}");
    }
    let region = capacity_region(&caps, settings.secure);
    println!(
        "closed-form region ({}):",
        if settings.secure { "secure" } else { "plain" }
    );
    for constraint in &region.constraints {
        println!("  {constraint}");
    }
    Ok(())
}

fn cmd_impossibility(limit: Option<u32>) -> Result<(), Error> {
    let end = limit.unwrap_or(FAMILY_COUNT).min(FAMILY_COUNT);
    let started = Instant::now();
    let summary = search_range(0..end);
    eprintln!("search took {:?}", started.elapsed());
    println!("families scanned: {}", summary.scanned);
    println!("decode both sessions: {}", summary.decodable_both);
    println!("secure with positive rate: {}", summary.secure_positive);
    let describe = |index: Option<u32>| match index {
        Some(i) => format!("index {i} ({})", EncoderFamily::from_index(i)),
        None => "none".to_string(),
    };
    println!(
        "first family decoding both: {}",
        describe(summary.first_decodable_both)
    );
    println!(
        "first secure positive-rate family: {}",
        describe(summary.first_secure_positive)
    );
    Ok(())
}
