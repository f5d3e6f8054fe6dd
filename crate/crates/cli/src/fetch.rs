//! Snapshot listings and archives from the remote endpoint or a local mirror.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use corpusforge::warc::{self, ListingError, ListingSource, LocalListing, SnapshotRef};

/// Either an HTTP(S) endpoint or a directory laid out like one.
pub enum Source {
    Http { base: String, retries: u32 },
    Local(LocalListing),
}

impl Source {
    pub fn new(base: &str, retries: u32) -> Self {
        if base.starts_with("http://") || base.starts_with("https://") {
            Source::Http {
                base: base.trim_end_matches('/').to_string(),
                retries: retries.max(1),
            }
        } else {
            Source::Local(LocalListing::new(base.strip_prefix("file://").unwrap_or(base)))
        }
    }

    /// Copies `path` (relative to the base) into `dest`.
    pub fn download(&self, path: &str, dest: &Path) -> Result<()> {
        match self {
            Source::Local(local) => {
                let src = local.root.join(path);
                fs::copy(&src, dest).with_context(|| format!("copying {}", src.display()))?;
            }
            Source::Http { base, retries } => {
                let url = format!("{base}/{path}");
                let tmp = dest.with_extension("part");
                with_retries(*retries, || {
                    let mut body = get(&url)?;
                    let mut f = fs::File::create(&tmp)?;
                    io::copy(&mut body, &mut f).map_err(Failure::Retry)?;
                    Ok(())
                })
                .with_context(|| format!("downloading {url}"))?;
                fs::rename(&tmp, dest)?;
            }
        }
        Ok(())
    }
}

impl ListingSource for Source {
    fn fetch_listing(&self, snapshot_id: &str) -> Result<Vec<u8>, ListingError> {
        match self {
            Source::Local(local) => local.fetch_listing(snapshot_id),
            Source::Http { base, retries } => {
                let url = warc::listing_url(base, snapshot_id);
                with_retries(*retries, || {
                    let mut buf = Vec::new();
                    get(&url)?.read_to_end(&mut buf).map_err(Failure::Retry)?;
                    Ok(buf)
                })
                .map_err(|e| ListingError::Fetch {
                    snapshot_id: snapshot_id.to_string(),
                    message: format!("{url}: {e}"),
                })
            }
        }
    }
}

#[derive(Debug)]
enum Failure {
    /// Worth another attempt (transport problems, server errors).
    Retry(io::Error),
    Fatal(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Retry(e) => write!(f, "{e}"),
            Failure::Fatal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Fatal(e.to_string())
    }
}

fn get(url: &str) -> Result<Box<dyn Read + Send + Sync + 'static>, Failure> {
    match ureq::get(url).call() {
        Ok(resp) => Ok(resp.into_reader()),
        Err(ureq::Error::Status(code, _)) if code >= 500 || code == 429 => {
            Err(Failure::Retry(io::Error::other(format!("HTTP {code}"))))
        }
        Err(ureq::Error::Status(code, _)) => Err(Failure::Fatal(format!("HTTP {code}"))),
        Err(e) => Err(Failure::Retry(io::Error::other(e.to_string()))),
    }
}

fn with_retries<T>(attempts: u32, mut f: impl FnMut() -> Result<T, Failure>) -> Result<T, Failure> {
    let mut delay = Duration::from_millis(500);
    for attempt in 1.. {
        match f() {
            Err(Failure::Retry(e)) if attempt < attempts => {
                log::warn!("attempt {attempt} failed: {e}; retrying in {delay:?}");
                thread::sleep(delay);
                delay *= 2;
            }
            other => return other,
        }
    }
    unreachable!()
}

/// Writes `<out>/<snapshot>.paths` and downloads the first `download`
/// archives into `<out>/<snapshot>/`.
pub fn fetch_snapshot(source: &Source, snapshot_id: &str, out: &Path, download: usize) -> Result<SnapshotRef> {
    let snapshot = warc::list_snapshot_paths(snapshot_id, source)?;
    fs::create_dir_all(out)?;
    let listing = out.join(format!("{snapshot_id}.paths"));
    fs::write(&listing, snapshot.warc_paths.join("\n") + "\n")?;
    if download > 0 {
        let dir = out.join(snapshot_id);
        fs::create_dir_all(&dir)?;
        for path in snapshot.warc_paths.iter().take(download) {
            let Some(name) = Path::new(path).file_name() else {
                bail!("listing entry {path:?} has no file name");
            };
            let dest: PathBuf = dir.join(name);
            log::info!("downloading {path}");
            source.download(path, &dest)?;
        }
    }
    Ok(snapshot)
}
