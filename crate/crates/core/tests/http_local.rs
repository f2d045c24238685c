//! The real ureq transport against a throwaway HTTP server on localhost.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use uavsim::geomath::GeoPoint;
use uavsim::imaging::Image;
use uavsim::provider::{ApiKey, Backoff, CaptureSpec, HttpProvider, ImageProvider, UreqTransport};
use uavsim::{Error, MapType};

struct Reply {
    status: u16,
    content_type: &'static str,
    body: Vec<u8>,
}

/// Serves `replies` in order, one per connection, and reports request lines.
fn serve(replies: Vec<Reply>) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for reply in replies {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let _ = tx.send(line.trim_end().to_string());
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap() == 0 || h == "\r\n" {
                    break;
                }
            }
            let head = format!(
                "HTTP/1.1 {} X\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                reply.status,
                reply.content_type,
                reply.body.len()
            );
            stream.write_all(head.as_bytes()).unwrap();
            stream.write_all(&reply.body).unwrap();
        }
    });
    (format!("http://{addr}/maps/api/staticmap"), rx)
}

fn spec() -> CaptureSpec {
    CaptureSpec {
        center: GeoPoint::new(35.16, -89.9).unwrap(),
        zoom: 18,
        res_x: 20,
        res_y: 10,
        map_type: MapType::Satellite,
        hide_labels: true,
    }
}

fn provider(endpoint: &str) -> HttpProvider {
    HttpProvider::with_transport(
        ApiKey::new("local-key").unwrap(),
        Box::new(UreqTransport::new(Duration::from_secs(5))),
    )
    .endpoint(endpoint)
    .backoff(Backoff::none())
}

#[test]
fn retries_over_real_sockets() {
    let png = Image::filled(20, 10, 3, 200).unwrap().encode_png().unwrap();
    let (endpoint, rx) = serve(vec![
        Reply {
            status: 503,
            content_type: "text/plain",
            body: b"busy".to_vec(),
        },
        Reply {
            status: 200,
            content_type: "image/png",
            body: png,
        },
    ]);
    let r = provider(&endpoint).fetch(&spec(), 3).unwrap();
    assert_eq!(r.attempts, 2);
    assert_eq!(r.content_type, "image/png");
    assert_eq!((r.image.width(), r.image.height()), (20, 10));
    let first = rx.recv().unwrap();
    assert_eq!(
        first,
        "GET /maps/api/staticmap?center=35.160000,-89.900000&zoom=18&size=20x10&maptype=satellite\
         &scale=1&style=feature%3Aall%7Celement%3Alabels%7Cvisibility%3Aoff&key=local-key HTTP/1.1"
    );
}

#[test]
fn forbidden_is_auth_error() {
    let (endpoint, rx) = serve(vec![Reply {
        status: 403,
        content_type: "text/plain",
        body: b"quota".to_vec(),
    }]);
    let err = provider(&endpoint).fetch(&spec(), 3).unwrap_err();
    assert!(matches!(err, Error::Auth { status: 403 }));
    assert_eq!(rx.iter().count(), 1);
}

#[test]
fn refused_connection_exhausts_retries() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let err = provider(&format!("http://127.0.0.1:{port}/x"))
        .fetch(&spec(), 1)
        .unwrap_err();
    match err {
        Error::Transport {
            status, attempts, ..
        } => {
            assert_eq!(status, None);
            assert_eq!(attempts, 2);
        }
        other => panic!("unexpected {other:?}"),
    }
}
