//! Command-line front end for the `optbwtr` compressed text index.
//!
//! `build` turns a text file (or a newline-delimited dictionary with
//! `--dict`) into one self-contained index file; the query subcommands load
//! that file and answer counting, locating, extraction, decompression, and
//! prefix queries. Plain output is line-oriented and diff-friendly; `--json`
//! switches the informational commands to one JSON object per line.
//!
//! Exit codes are stable: 0 success (including empty results), 1 usage
//! errors, 2 reserved byte in build input (the offset is reported),
//! 3 I/O failures or unreadable index files, 4 the index lacks the section
//! a query needs, 5 extract arguments outside the indexed range (the
//! message names the permitted maximum).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optbwtr::{
    decompress, load, save, CompactTrie, Dictionary, ExtractIndex, IndexFile, OptBwtrIndex, Rlbwt,
    Text, SENTINEL, TERMINATOR,
};

#[derive(Parser)]
#[command(name = "optbwtr", version, about = "Run-length compressed full-text index")]
struct Cli {
    /// Emit one JSON object per line instead of plain text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index file from text (or from a dictionary with --dict).
    Build(BuildArgs),

    /// Print the number of occurrences of a pattern.
    Count {
        /// Index file produced by `build`.
        index: PathBuf,
        /// Pattern bytes; \xNN and \\ escapes accepted.
        #[arg(allow_hyphen_values = true)]
        pattern: String,
    },

    /// Print the occurrence positions of a pattern, one per line.
    Locate {
        /// Index file produced by `build`.
        index: PathBuf,
        /// Pattern bytes; \xNN and \\ escapes accepted.
        #[arg(allow_hyphen_values = true)]
        pattern: String,
        /// Print positions in suffix-array order instead of ascending.
        #[arg(long)]
        sa_order: bool,
    },

    /// Write text starting at a bookmarked position to stdout.
    Extract {
        /// Index file built with --marks.
        index: PathBuf,
        /// 1-based bookmark number (in ascending position order).
        #[arg(long)]
        mark: Option<usize>,
        /// Text position of a bookmark (must equal a stored mark).
        #[arg(long)]
        at: Option<usize>,
        /// Number of characters to emit.
        #[arg(long)]
        length: usize,
    },

    /// Write the complete original text to stdout.
    Decompress {
        /// Index file produced by `build`.
        index: PathBuf,
    },

    /// Print the dictionary entries having a pattern as prefix.
    Prefix {
        /// Index file built with --dict.
        index: PathBuf,
        /// Pattern bytes; \xNN and \\ escapes accepted.
        #[arg(allow_hyphen_values = true)]
        pattern: String,
        /// Print only the number of matching entries.
        #[arg(long)]
        count: bool,
    },

    /// Print size statistics of an index file.
    Stats {
        /// Index file produced by `build`.
        index: PathBuf,
    },
}

#[derive(Args)]
struct BuildArgs {
    /// Input file; "-" reads stdin.
    #[arg(long)]
    input: String,

    /// Output index path.
    #[arg(long)]
    output: PathBuf,

    /// Comma-separated text positions to bookmark for extraction
    /// (stored sorted ascending; duplicates collapse).
    #[arg(long, value_delimiter = ',')]
    marks: Vec<usize>,

    /// Treat the input as a newline-delimited dictionary: entries become
    /// prefix-searchable and the indexed text is their concatenation,
    /// each entry followed by the terminator byte 0x01.
    #[arg(long)]
    dict: bool,
}

/// Process-level error: carries the documented exit code and a message.
enum CliError {
    /// Bad arguments or unusable input data (exit 1).
    Usage(String),
    /// Build input contains a byte the index reserves (exit 2).
    Reserved { offset: usize, byte: u8 },
    /// I/O failure or unreadable index file (exit 3).
    Io(String),
    /// The loaded index lacks the section this query needs (exit 4).
    MissingSection(&'static str),
    /// Extract arguments outside the indexed range (exit 5).
    Extract(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Reserved { .. } => 2,
            CliError::Io(_) => 3,
            CliError::MissingSection(_) => 4,
            CliError::Extract(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) | CliError::Extract(msg) => f.write_str(msg),
            CliError::Reserved { offset, byte } => {
                write!(f, "input contains reserved byte {byte:#04x} at offset {offset}")
            }
            CliError::MissingSection(which) => {
                write!(f, "index file has no {which} section")
            }
        }
    }
}

fn internal(err: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("internal error: {err}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // Help and version requests are not failures; real parse errors
            // exit 1 (clap's default 2 is taken by reserved input bytes).
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("optbwtr: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => cmd_build(args, cli.json),
        Command::Count { index, pattern } => cmd_count(&index, &pattern, cli.json),
        Command::Locate {
            index,
            pattern,
            sa_order,
        } => cmd_locate(&index, &pattern, sa_order, cli.json),
        Command::Extract {
            index,
            mark,
            at,
            length,
        } => cmd_extract(&index, mark, at, length),
        Command::Decompress { index } => cmd_decompress(&index),
        Command::Prefix {
            index,
            pattern,
            count,
        } => cmd_prefix(&index, &pattern, count, cli.json),
        Command::Stats { index } => cmd_stats(&index, cli.json),
    }
}

fn cmd_build(args: BuildArgs, json: bool) -> Result<(), CliError> {
    let raw = read_input(&args.input)?;
    scan_reserved(&raw, args.dict)?;

    let mut marks = args.marks;
    marks.sort_unstable();
    marks.dedup();

    let file = if args.dict {
        let dict = Dictionary::new(split_dict_lines(&raw)?)
            .map_err(|err| CliError::Usage(err.to_string()))?;
        let trie = CompactTrie::build(&dict);
        let rlbwt = trie.concat_rlbwt().clone();
        let search = OptBwtrIndex::from_rlbwt(rlbwt.clone()).map_err(internal)?;
        let extract = build_extract(&rlbwt, &search, marks)?;
        IndexFile {
            rlbwt,
            search: Some(search),
            extract,
            prefix: Some(trie),
        }
    } else {
        let text = Text::from_bytes(&raw).map_err(|err| CliError::Usage(err.to_string()))?;
        let search = OptBwtrIndex::build(&text);
        let rlbwt = search.rlbwt().clone();
        let extract = build_extract(&rlbwt, &search, marks)?;
        IndexFile {
            rlbwt,
            search: Some(search),
            extract,
            prefix: None,
        }
    };

    let mut sink = fs::File::create(&args.output)
        .map_err(|err| CliError::Io(format!("{}: {err}", args.output.display())))?;
    let bytes = save(&file, &mut sink)
        .map_err(|err| CliError::Io(format!("{}: {err}", args.output.display())))?;

    let search = file.search.as_ref().expect("build always attaches search");
    let tables = search.tables();
    if json {
        let mut obj = serde_json::Map::new();
        obj.insert("command".into(), "build".into());
        obj.insert("n".into(), file.rlbwt.len().into());
        obj.insert("r".into(), file.rlbwt.num_runs().into());
        obj.insert("b_lf".into(), tables.move_lf().len().into());
        obj.insert("b_sa".into(), tables.move_sa().len().into());
        obj.insert("bytes".into(), bytes.into());
        if let Some(extract) = &file.extract {
            obj.insert("marks".into(), extract.marks().len().into());
        }
        if let Some(trie) = &file.prefix {
            obj.insert("strings".into(), trie.num_strings().into());
        }
        println!("{}", serde_json::Value::Object(obj));
    } else {
        println!(
            "n={} r={} b_lf={} b_sa={} bytes={}",
            file.rlbwt.len(),
            file.rlbwt.num_runs(),
            tables.move_lf().len(),
            tables.move_sa().len(),
            bytes,
        );
    }
    Ok(())
}

fn cmd_count(index: &Path, pattern: &str, json: bool) -> Result<(), CliError> {
    let file = load_index(index)?;
    let search = file
        .search
        .as_ref()
        .ok_or(CliError::MissingSection("search"))?;
    let pattern = parse_pattern(pattern)?;
    let count = search.count(&pattern);
    if json {
        println!(
            "{}",
            serde_json::json!({
                "command": "count",
                "pattern": escape_bytes(&pattern),
                "count": count,
            })
        );
    } else {
        println!("{count}");
    }
    Ok(())
}

fn cmd_locate(index: &Path, pattern: &str, sa_order: bool, json: bool) -> Result<(), CliError> {
    let file = load_index(index)?;
    let search = file
        .search
        .as_ref()
        .ok_or(CliError::MissingSection("search"))?;
    let pattern = parse_pattern(pattern)?;
    let mut positions = search.locate(&pattern);
    if !sa_order {
        positions.sort_unstable();
    }
    if json {
        println!(
            "{}",
            serde_json::json!({
                "command": "locate",
                "pattern": escape_bytes(&pattern),
                "order": if sa_order { "sa" } else { "text" },
                "positions": positions,
            })
        );
    } else {
        let mut out = io::stdout().lock();
        for position in &positions {
            writeln!(out, "{position}").map_err(|err| CliError::Io(format!("stdout: {err}")))?;
        }
    }
    Ok(())
}

fn cmd_extract(
    index: &Path,
    mark: Option<usize>,
    at: Option<usize>,
    length: usize,
) -> Result<(), CliError> {
    let file = load_index(index)?;
    let extract = file
        .extract
        .as_ref()
        .ok_or(CliError::MissingSection("extract"))?;
    let j = match (mark, at) {
        (Some(j), None) => j,
        (None, Some(position)) => extract
            .marks()
            .binary_search(&position)
            .map(|found| found + 1)
            .map_err(|_| CliError::Extract(format!("no bookmark at text position {position}")))?,
        _ => {
            return Err(CliError::Usage(
                "exactly one of --mark and --at is required".into(),
            ))
        }
    };
    let bytes = extract
        .extract(j, length)
        .map_err(|err| CliError::Extract(err.to_string()))?;
    write_stdout(&bytes)
}

fn cmd_decompress(index: &Path) -> Result<(), CliError> {
    let file = load_index(index)?;
    let text = decompress(&file.rlbwt).map_err(internal)?;
    write_stdout(text.without_sentinel())
}

fn cmd_prefix(index: &Path, pattern: &str, count_only: bool, json: bool) -> Result<(), CliError> {
    let file = load_index(index)?;
    let trie = file
        .prefix
        .as_ref()
        .ok_or(CliError::MissingSection("prefix"))?;
    let pattern = parse_pattern(pattern)?;
    if count_only {
        let count = trie.prefix_count(&pattern);
        if json {
            println!(
                "{}",
                serde_json::json!({
                    "command": "prefix",
                    "pattern": escape_bytes(&pattern),
                    "count": count,
                })
            );
        } else {
            println!("{count}");
        }
    } else {
        let lines = trie.prefix_locate(&pattern);
        if json {
            println!(
                "{}",
                serde_json::json!({
                    "command": "prefix",
                    "pattern": escape_bytes(&pattern),
                    "lines": lines,
                })
            );
        } else {
            let mut out = io::stdout().lock();
            for line in &lines {
                writeln!(out, "{line}").map_err(|err| CliError::Io(format!("stdout: {err}")))?;
            }
        }
    }
    Ok(())
}

fn cmd_stats(index: &Path, json: bool) -> Result<(), CliError> {
    let file_bytes = fs::metadata(index).map(|meta| meta.len()).unwrap_or(0);
    let file = load_index(index)?;

    let mut sections = vec!["rlbwt"];
    if file.search.is_some() {
        sections.push("search");
    }
    if file.extract.is_some() {
        sections.push("extract");
    }
    if file.prefix.is_some() {
        sections.push("prefix");
    }

    if json {
        let mut obj = serde_json::Map::new();
        obj.insert("command".into(), "stats".into());
        obj.insert("n".into(), file.rlbwt.len().into());
        obj.insert("r".into(), file.rlbwt.num_runs().into());
        obj.insert("file_bytes".into(), file_bytes.into());
        obj.insert(
            "sections".into(),
            sections.iter().map(|s| (*s).into()).collect::<Vec<serde_json::Value>>().into(),
        );
        if let Some(search) = &file.search {
            let tables = search.tables();
            obj.insert("b_lf".into(), tables.move_lf().len().into());
            obj.insert("b_sa".into(), tables.move_sa().len().into());
            obj.insert("b_fl".into(), tables.move_fl().len().into());
        }
        if let Some(extract) = &file.extract {
            obj.insert("marks".into(), extract.marks().len().into());
        }
        if let Some(trie) = &file.prefix {
            obj.insert("strings".into(), trie.num_strings().into());
            obj.insert("concat_runs".into(), trie.num_runs().into());
        }
        println!("{}", serde_json::Value::Object(obj));
    } else {
        println!("n={}", file.rlbwt.len());
        println!("r={}", file.rlbwt.num_runs());
        println!("file_bytes={file_bytes}");
        println!("sections={}", sections.join(","));
        if let Some(search) = &file.search {
            let tables = search.tables();
            println!("b_lf={}", tables.move_lf().len());
            println!("b_sa={}", tables.move_sa().len());
            println!("b_fl={}", tables.move_fl().len());
        }
        if let Some(extract) = &file.extract {
            println!("marks={}", extract.marks().len());
        }
        if let Some(trie) = &file.prefix {
            println!("strings={}", trie.num_strings());
            println!("concat_runs={}", trie.num_runs());
        }
    }
    Ok(())
}

/// Read the build input: a file path, or stdin for "-".
fn read_input(input: &str) -> Result<Vec<u8>, CliError> {
    if input == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|err| CliError::Io(format!("stdin: {err}")))?;
        Ok(buf)
    } else {
        fs::read(input).map_err(|err| CliError::Io(format!("{input}: {err}")))
    }
}

/// Reject input bytes the index reserves: the sentinel always, plus the
/// dictionary terminator in --dict mode (newlines delimit entries there and
/// never reach the index). Offsets are 1-based.
fn scan_reserved(raw: &[u8], dict: bool) -> Result<(), CliError> {
    for (i, &byte) in raw.iter().enumerate() {
        if byte == SENTINEL || (dict && byte == TERMINATOR) {
            return Err(CliError::Reserved {
                offset: i + 1,
                byte,
            });
        }
    }
    Ok(())
}

/// Split newline-delimited dictionary input into entries. A single trailing
/// newline is tolerated; interior empty lines are rejected downstream.
fn split_dict_lines(raw: &[u8]) -> Result<Vec<Vec<u8>>, CliError> {
    let body = raw.strip_suffix(b"\n").unwrap_or(raw);
    if body.is_empty() {
        return Err(CliError::Usage("dictionary input holds no entries".into()));
    }
    Ok(body.split(|&b| b == b'\n').map(<[u8]>::to_vec).collect())
}

fn build_extract(
    rlbwt: &Rlbwt,
    search: &OptBwtrIndex,
    marks: Vec<usize>,
) -> Result<Option<ExtractIndex>, CliError> {
    if marks.is_empty() {
        return Ok(None);
    }
    ExtractIndex::build(rlbwt, search.tables(), marks)
        .map(Some)
        .map_err(|err| CliError::Usage(err.to_string()))
}

fn load_index(path: &Path) -> Result<IndexFile, CliError> {
    let mut file =
        fs::File::open(path).map_err(|err| CliError::Io(format!("{}: {err}", path.display())))?;
    load(&mut file).map_err(|err| CliError::Io(format!("{}: {err}", path.display())))
}

fn write_stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)
        .and_then(|()| out.flush())
        .map_err(|err| CliError::Io(format!("stdout: {err}")))
}

/// Decode a command-line pattern: plain bytes plus `\xNN` hex escapes and
/// `\\` for a literal backslash.
fn parse_pattern(arg: &str) -> Result<Vec<u8>, CliError> {
    let bytes = arg.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        match bytes.get(i + 1) {
            Some(b'\\') => {
                out.push(b'\\');
                i += 2;
            }
            Some(b'x') => {
                let value = bytes
                    .get(i + 2..i + 4)
                    .and_then(|pair| std::str::from_utf8(pair).ok())
                    .and_then(|pair| u8::from_str_radix(pair, 16).ok())
                    .ok_or_else(|| {
                        CliError::Usage(format!("bad \\x escape in pattern at byte {}", i + 1))
                    })?;
                out.push(value);
                i += 4;
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "unsupported escape in pattern at byte {}: only \\xNN and \\\\ are recognized",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Inverse of [`parse_pattern`] for display: printable ASCII stays itself,
/// everything else becomes `\xNN`.
fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &byte in bytes {
        match byte {
            b'\\' => out.push_str("\\\\"),
            0x20..=0x7e => out.push(byte as char),
            _ => out.push_str(&format!("\\x{byte:02x}")),
        }
    }
    out
}
