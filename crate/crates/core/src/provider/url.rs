use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::{ApiKey, CaptureSpec};
use crate::error::Result;

pub const DEFAULT_ENDPOINT: &str = "https://maps.googleapis.com/maps/api/staticmap";

/// Style rule that turns off every text label and street name.
pub const HIDE_LABELS_STYLE: &str = "feature:all|element:labels|visibility:off";

// RFC 3986 unreserved characters stay literal.
const QUERY_VALUE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

/// Request URL for one capture.
///
/// Parameter order is fixed: `center`, `zoom`, `size`, `maptype`, `scale`,
/// `style` (only when labels are hidden), `key`. Coordinates carry six
/// decimals; `scale` is always 1.
pub fn build_url(endpoint: &str, spec: &CaptureSpec, key: &ApiKey) -> Result<String> {
    spec.validate()?;
    let mut url = format!(
        "{endpoint}?center={:.6},{:.6}&zoom={}&size={}x{}&maptype={}&scale=1",
        spec.center.lat, spec.center.lon, spec.zoom, spec.res_x, spec.res_y, spec.map_type
    );
    if spec.hide_labels {
        url.push_str("&style=");
        url.extend(utf8_percent_encode(HIDE_LABELS_STYLE, QUERY_VALUE));
    }
    url.push_str("&key=");
    url.extend(utf8_percent_encode(key.expose(), QUERY_VALUE));
    Ok(url)
}
