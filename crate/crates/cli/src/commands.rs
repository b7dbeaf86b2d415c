use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use mtd_core::alphabet::Alphabet;
use mtd_core::berchtold::{berchtold_fit, BerchtoldConfig};
use mtd_core::counts::count_ngrams;
use mtd_core::em::{counts_loglik, fit_with_restarts, init_contingency, EmConfig, FitReport};
use mtd_core::experiments::{bic_compare, bic_table_tsv, tv_experiment, TvConfig};
use mtd_core::io::{parse_sequences, ModelFile, Provenance, SeqFormat, StoredModel};
use mtd_core::model::{derive_seeds, sample_sequence, FullMarkovModel, InitPolicy, TransitionModel};
use mtd_core::selection::{bic, dim_full_markov, dim_raw_mtd, dim_theta_u, model_dimension};
use mtd_core::{from_theta_u, to_theta_u, DimConvention, MtdError, Result, Sequence};
use sha2::{Digest, Sha256};

use crate::{Command, Common, Dimension, Input, InputFormat, Method, Target};

const DEFAULT_ORDER: usize = 2;

pub fn run(command: Command, argv: &[String]) -> Result<()> {
    let line = command_line(argv);
    match command {
        Command::Count { input, common } => count(&input, &common),
        Command::Fit {
            input,
            method,
            max_iters,
            floor,
            reference,
            dimension,
            trace,
            report,
            common,
        } => {
            let opts = FitOptions {
                method,
                max_iters,
                floor,
                reference,
                dimension,
                trace,
                report,
            };
            fit(&input, &opts, &common, line)
        }
        Command::Eval {
            model,
            input,
            raw_length,
            common,
        } => eval(&model, &input, raw_length, &common),
        Command::Sample {
            model,
            length,
            count,
            prefix,
            common,
        } => sample(&model, length, count, prefix.as_deref(), &common),
        Command::Expand { model, common } => expand(&model, &common),
        Command::Convert {
            model,
            to,
            reference,
            common,
        } => convert(&model, to, reference.as_deref(), &common, line),
        Command::TvExperiment {
            generator_order,
            length,
            fit_orders,
            replicates,
            word_len,
            common,
        } => {
            let config = TvConfig {
                alphabet: alphabet_flag(&common)?,
                generator_order,
                seq_len: length,
                fit_orders,
                replicates,
                word_len,
                seed: common.seed,
            };
            let result = tv_experiment(&config)?;
            if !result.tv.is_empty() {
                eprintln!("best order by replicate: {:?}", result.best_orders());
            }
            emit(&common.out, &result.to_tsv())
        }
        Command::BicCompare {
            input,
            orders,
            lags,
            raw_length,
            dimension,
            common,
        } => {
            let alphabet = alphabet_flag(&common)?;
            let (seqs, _) = read_input(&input, &alphabet)?;
            let config = EmConfig {
                dim_convention: convention(dimension),
                ..em_config(&common, 1000, None, 0)?
            };
            let rows = bic_compare(&seqs, &orders, &lags, &config, raw_length)?;
            emit(&common.out, &bic_table_tsv(&rows))
        }
    }
}

struct FitOptions {
    method: Method,
    max_iters: usize,
    floor: Option<f64>,
    reference: Option<String>,
    dimension: Dimension,
    trace: Option<PathBuf>,
    report: Option<PathBuf>,
}

fn command_line(argv: &[String]) -> String {
    std::iter::once("mtd")
        .chain(argv.iter().skip(1).map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ")
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| MtdError::Io(format!("{}: {e}", path.display())))
}

fn alphabet_flag(common: &Common) -> Result<Alphabet> {
    Alphabet::parse(common.alphabet.as_deref().unwrap_or("dna"))
}

fn convention(d: Dimension) -> DimConvention {
    match d {
        Dimension::ThetaU => DimConvention::ThetaU,
        Dimension::Raw => DimConvention::Raw,
    }
}

fn letter(alphabet: &Alphabet, label: Option<&str>) -> Result<usize> {
    match label {
        None => Ok(0),
        Some(l) => alphabet.index_of(l).ok_or_else(|| MtdError::UnknownLabel(l.to_string())),
    }
}

fn em_config(common: &Common, max_iters: usize, floor: Option<f64>, reference: usize) -> Result<EmConfig> {
    Ok(EmConfig {
        epsilon: common.epsilon,
        max_iters,
        n_restarts: common.restarts,
        seed: common.seed,
        floor,
        variant: common.variant.parse()?,
        lag_order: common.lag_order,
        reference,
        dim_convention: DimConvention::ThetaU,
    })
}

/// Reads the sequence file and returns it with the SHA-256 of its bytes.
fn read_input(input: &Input, alphabet: &Alphabet) -> Result<(Vec<Sequence>, String)> {
    let bytes = fs::read(&input.input).map_err(|e| MtdError::Io(format!("{}: {e}", input.input.display())))?;
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes)
        .map_err(|_| MtdError::Format(format!("{} is not UTF-8 text", input.input.display())))?;
    let format = match input.format {
        InputFormat::Plain => SeqFormat::Plain,
        InputFormat::Fasta => SeqFormat::Fasta,
        InputFormat::Auto => {
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            if first.starts_with('>') {
                SeqFormat::Fasta
            } else {
                SeqFormat::Plain
            }
        }
    };
    Ok((parse_sequences(&text, format, alphabet)?, digest))
}

fn count(input: &Input, common: &Common) -> Result<()> {
    let alphabet = alphabet_flag(common)?;
    let (seqs, _) = read_input(input, &alphabet)?;
    let counts = count_ngrams(&seqs, common.order.unwrap_or(DEFAULT_ORDER))?;
    emit(&common.out, &counts.to_tsv())
}

fn fit(input: &Input, opts: &FitOptions, common: &Common, line: String) -> Result<()> {
    let alphabet = alphabet_flag(common)?;
    let (seqs, digest) = read_input(input, &alphabet)?;
    let counts = count_ngrams(&seqs, common.order.unwrap_or(DEFAULT_ORDER))?;
    let reference = letter(&alphabet, opts.reference.as_deref())?;
    let config = EmConfig {
        dim_convention: convention(opts.dimension),
        ..em_config(common, opts.max_iters, opts.floor, reference)?
    };
    let report: FitReport = match opts.method {
        Method::Em => fit_with_restarts(&counts, &config)?,
        Method::Berchtold => {
            let init = init_contingency(&counts, config.lag_order, config.variant)?;
            let bconfig = BerchtoldConfig {
                epsilon: config.epsilon,
                max_iters: config.max_iters,
                reference,
                ..BerchtoldConfig::default()
            };
            let mut r = berchtold_fit(&counts, &init, &bconfig)?;
            r.bic = bic(r.final_loglik, model_dimension(&r.model, config.dim_convention), counts.total());
            r
        }
    };
    if let Some(path) = &opts.trace {
        write_file(path, &report.trace_tsv())?;
    }
    if let Some(path) = &opts.report {
        let summary = format!(
            "final_loglik\titerations\tconverged\trestart_index\tn_terms\tbic\n{}\t{}\t{}\t{}\t{}\t{}\n",
            report.final_loglik,
            report.iterations,
            report.converged,
            report.restart_index,
            counts.total(),
            report.bic
        );
        write_file(path, &summary)?;
    }
    if !report.converged {
        eprintln!("mtd: warning: stopped after {} iterations without converging", report.iterations);
    }
    let provenance = Provenance {
        command: line,
        seed: Some(common.seed),
        corpus_digest: Some(digest),
    };
    emit(&common.out, &ModelFile::from_model(&StoredModel::Mtd(report.model), provenance).to_json()?)
}

/// Loads a model file and checks any alphabet or order given on the command
/// line against it.
fn load(path: &Path, common: &Common) -> Result<(ModelFile, StoredModel)> {
    let file = ModelFile::read(path)?;
    let stored = file.to_model()?;
    if let Some(spec) = &common.alphabet {
        let given = Alphabet::parse(spec)?;
        if &given != stored.alphabet() {
            return Err(MtdError::AlphabetMismatch(format!(
                "--alphabet {given} but the model uses {}",
                stored.alphabet()
            )));
        }
    }
    if let Some(m) = common.order {
        if m != file.m {
            return Err(MtdError::ShapeMismatch(format!("--order {m} but the model has order {}", file.m)));
        }
    }
    Ok((file, stored))
}

fn transition_model(stored: StoredModel) -> Result<Box<dyn TransitionModel>> {
    Ok(match stored {
        StoredModel::Mtd(m) => Box::new(m),
        StoredModel::Full(f) => Box::new(f),
        StoredModel::ThetaU(t) => Box::new(from_theta_u(&t)?),
    })
}

fn full_table(stored: &StoredModel) -> Result<FullMarkovModel> {
    match stored {
        StoredModel::Mtd(m) => m.full_transition_matrix(),
        StoredModel::Full(f) => Ok(f.clone()),
        StoredModel::ThetaU(t) => from_theta_u(t),
    }
}

fn eval(path: &Path, input: &Input, raw_length: bool, common: &Common) -> Result<()> {
    let (file, stored) = load(path, common)?;
    let q = stored.alphabet().size();
    let (m, l) = (file.m, file.l);
    let (dim_u, dim_raw) = match &stored {
        StoredModel::Mtd(model) => (
            model_dimension(model, DimConvention::ThetaU),
            model_dimension(model, DimConvention::Raw),
        ),
        StoredModel::Full(_) => (dim_full_markov(m, q), dim_full_markov(m, q)),
        StoredModel::ThetaU(_) => (dim_theta_u(m, l, q), dim_raw_mtd(m, l, q)),
    };
    let (seqs, _) = read_input(input, stored.alphabet())?;
    let counts = count_ngrams(&seqs, m)?;
    if counts.is_empty() {
        return Err(MtdError::EmptyCorpus);
    }
    let model = transition_model(stored)?;
    let ll = counts_loglik(model.as_ref(), &counts)?;
    if let Some(word) = &ll.impossible {
        eprintln!("mtd: warning: the model gives probability zero to the observed word {word}");
    }
    let n = if raw_length {
        seqs.iter().map(Sequence::len).sum::<usize>() as u64
    } else {
        counts.total()
    };
    let text = format!(
        "loglik\tn_terms\tdim_theta_u\tdim_raw\tbic\tbic_raw\n{}\t{}\t{}\t{}\t{}\t{}\n",
        ll.value,
        ll.n_terms,
        dim_u,
        dim_raw,
        bic(ll.value, dim_u, n),
        bic(ll.value, dim_raw, n)
    );
    emit(&common.out, &text)
}

fn sample(path: &Path, length: usize, count: usize, prefix: Option<&str>, common: &Common) -> Result<()> {
    let (_, stored) = load(path, common)?;
    let alphabet = stored.alphabet().clone();
    let init = match prefix {
        None => InitPolicy::Uniform,
        Some(text) => {
            let seq = Sequence::parse(&alphabet, text);
            if !seq.breaks().is_empty() {
                return Err(MtdError::UnknownLabel(format!("prefix {text:?} has letters outside {alphabet}")));
            }
            InitPolicy::Prefix(seq.data().to_vec())
        }
    };
    let model = transition_model(stored)?;
    let mut out = String::new();
    for seed in derive_seeds(common.seed, count) {
        out.push_str(&sample_sequence(model.as_ref(), length, seed, &init)?.to_text());
        out.push('\n');
    }
    emit(&common.out, &out)
}

fn expand(path: &Path, common: &Common) -> Result<()> {
    let (file, stored) = load(path, common)?;
    let full = full_table(&stored)?;
    let alphabet = stored.alphabet();
    let mut out = String::from("history");
    for s in alphabet.symbols() {
        out.push('\t');
        out.push_str(s);
    }
    out.push('\n');
    let table = full.table();
    for h in 0..table.rows() {
        out.push_str(&alphabet.spell_word(h, file.m));
        for p in table.row(h) {
            let _ = write!(out, "\t{p}");
        }
        out.push('\n');
    }
    emit(&common.out, &out)
}

fn convert(path: &Path, to: Target, reference: Option<&str>, common: &Common, line: String) -> Result<()> {
    let (file, stored) = load(path, common)?;
    let u = letter(stored.alphabet(), reference)?;
    let converted = match (&stored, to) {
        (StoredModel::Mtd(_), Target::Mtd)
        | (StoredModel::ThetaU(_), Target::ThetaU)
        | (StoredModel::Full(_), Target::FullMarkov) => stored.clone(),
        (StoredModel::Mtd(m), Target::ThetaU) => StoredModel::ThetaU(to_theta_u(m, u)?),
        (_, Target::FullMarkov) => StoredModel::Full(full_table(&stored)?),
        (_, target) => {
            return Err(MtdError::InvalidParameter(format!(
                "cannot convert a {:?} model to {target:?}: mixture parameters are not recoverable",
                file.model_kind
            )))
        }
    };
    let provenance = Provenance {
        command: line,
        ..file.provenance
    };
    emit(&common.out, &ModelFile::from_model(&converted, provenance).to_json()?)
}
