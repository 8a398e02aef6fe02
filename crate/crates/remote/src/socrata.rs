use nameguess_core::corpus::{CorpusError, Table};
use serde_json::Value;
use thiserror::Error;

pub const TOKEN_ENV: &str = "NAMEGUESS_SOCRATA_TOKEN";

#[derive(Debug, Error)]
pub enum SocrataError {
    #[error("limit must be at least 1")]
    ZeroLimit,
    #[error("HTTP {status} from {url}")]
    Status { status: u16, url: String },
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("decode: {0}")]
    Decode(String),
    #[error(transparent)]
    Table(#[from] CorpusError),
}

fn resource_url(domain: &str, dataset_id: &str) -> String {
    let base = if domain.contains("://") {
        domain.trim_end_matches('/').to_string()
    } else {
        format!("https://{}", domain.trim_end_matches('/'))
    };
    format!("{base}/resource/{dataset_id}.json")
}

fn cell(value: &Value) -> Option<String> {
    match value {
        Value::Null => None,
        Value::String(s) if s.is_empty() => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

/// Builds a table from Socrata's JSON rows. Fields absent from a row are
/// missing cells; headers are the union of field names in first-seen order.
pub fn table_from_records(dataset_id: &str, body: &Value) -> Result<Table, SocrataError> {
    let rows = body
        .as_array()
        .ok_or_else(|| SocrataError::Decode("expected a JSON array of records".into()))?;
    let mut headers: Vec<String> = Vec::new();
    for row in rows {
        let obj = row
            .as_object()
            .ok_or_else(|| SocrataError::Decode("record is not a JSON object".into()))?;
        for key in obj.keys() {
            if !headers.iter().any(|h| h == key) {
                headers.push(key.clone());
            }
        }
    }
    let cells = rows
        .iter()
        .map(|row| {
            let obj = row.as_object().expect("checked above");
            headers.iter().map(|h| obj.get(h).and_then(cell)).collect()
        })
        .collect();
    Ok(Table::new(dataset_id, headers, cells)?)
}

/// Downloads up to `limit` rows of a dataset. `domain` is a bare host
/// (https is assumed) or a base URL with scheme. The app token is read from
/// `NAMEGUESS_SOCRATA_TOKEN` when set.
pub async fn fetch_socrata(
    client: &reqwest::Client,
    domain: &str,
    dataset_id: &str,
    limit: usize,
) -> Result<Table, SocrataError> {
    if limit == 0 {
        return Err(SocrataError::ZeroLimit);
    }
    let url = resource_url(domain, dataset_id);
    let mut req = client.get(&url).query(&[("$limit", limit.to_string())]);
    if let Ok(token) = std::env::var(TOKEN_ENV) {
        req = req.header("X-App-Token", token);
    }
    let resp = req.send().await?;
    let status = resp.status();
    if !status.is_success() {
        return Err(SocrataError::Status { status: status.as_u16(), url });
    }
    let body: Value = resp
        .json()
        .await
        .map_err(|e| SocrataError::Decode(e.to_string()))?;
    let mut table = table_from_records(dataset_id, &body)?;
    if table.n_rows() > limit {
        table = table.truncated(limit);
    }
    Ok(table)
}
