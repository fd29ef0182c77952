//! Plain HTTPS download of a dataset file. Hub APIs (listing, pagination,
//! auth) are not handled: pass a direct file URL, e.g. a Hugging Face
//! `.../resolve/main/<file>.parquet` link.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

/// Accepts only absolute `https://` URLs with a host.
pub fn parse_https_url(s: &str) -> Result<String, String> {
    let rest = s
        .strip_prefix("https://")
        .ok_or_else(|| format!("{s:?} is not an https:// URL"))?;
    let host = rest.split(['/', '?', '#']).next().unwrap_or("");
    if host.is_empty() {
        return Err(format!("{s:?} has no host"));
    }
    Ok(s.to_string())
}

/// File name for a URL: its last non-empty path segment, query stripped.
pub fn file_name_of(url: &str) -> Option<String> {
    let path = url.split(['?', '#']).next()?;
    let after_host = path.strip_prefix("https://")?.split_once('/')?.1;
    after_host
        .rsplit('/')
        .find(|s| !s.is_empty())
        .map(str::to_string)
}

pub async fn fetch(url: &str, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let out = match out {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(file_name_of(url).context("URL has no file name; pass --out")?),
    };
    let res = reqwest::get(url).await.with_context(|| format!("requesting {url}"))?;
    let status = res.status();
    if !status.is_success() {
        bail!("{url} returned HTTP {status}");
    }
    let bytes = res.bytes().await.context("reading response body")?;
    std::fs::write(&out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    Ok(out)
}
