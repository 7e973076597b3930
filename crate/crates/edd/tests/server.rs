use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use edd::protocol::{Kind, RoomJson, SessionMessage};
use edd::session::serve;
use edd_core::{EngineConfig, Room};
use serde_json::{json, Value};

fn start_server() -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let cfg = EngineConfig {
        pop_size: 80,
        capacity: 5,
        publish_gen: 10,
        rng_seed: 3,
        ..EngineConfig::default()
    };
    thread::spawn(move || serve(listener, cfg));
    addr
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    seq: u64,
    seen: Vec<SessionMessage>,
}

impl Client {
    fn connect(addr: SocketAddr) -> Client {
        let stream = TcpStream::connect(addr).unwrap();
        stream
            .set_read_timeout(Some(Duration::from_secs(30)))
            .unwrap();
        Client {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: stream,
            seq: 0,
            seen: Vec::new(),
        }
    }

    fn next(&mut self) -> SessionMessage {
        let mut line = String::new();
        assert!(
            self.reader.read_line(&mut line).unwrap() > 0,
            "connection closed"
        );
        let msg: SessionMessage = serde_json::from_str(&line).unwrap();
        self.seen.push(msg.clone());
        msg
    }

    fn wait_for(&mut self, pred: impl Fn(&SessionMessage) -> bool) -> SessionMessage {
        loop {
            let msg = self.next();
            if pred(&msg) {
                return msg;
            }
        }
    }

    fn request(&mut self, op: &str, payload: Value) -> SessionMessage {
        self.seq += 1;
        let seq = self.seq;
        let line = SessionMessage::request(op, seq, payload).to_line();
        writeln!(self.writer, "{line}").unwrap();
        self.wait_for(|m| m.kind == Kind::Response && m.seq == seq)
    }

    fn ok(&mut self, op: &str, payload: Value) -> Value {
        let msg = self.request(op, payload);
        assert!(msg.error.is_none(), "{op}: {:?}", msg.error);
        assert_eq!(msg.op, op);
        msg.payload
    }
}

/// Rows of a cell's elite as known from the events seen so far.
fn latest_elite(seen: &[SessionMessage], cell: u64) -> Value {
    let mut rows = Value::Null;
    for m in seen
        .iter()
        .filter(|m| m.op == "elites" || m.op == "cellsImproved")
    {
        for c in m.payload["cells"].as_array().unwrap() {
            if c["cell"] == cell {
                rows = c["elite"]["room"]["rows"].clone();
            }
        }
    }
    rows
}

fn rows(room: &Value) -> Vec<String> {
    serde_json::from_value(room["rows"].clone()).unwrap()
}

#[test]
fn editor_round_trip_over_tcp() {
    let addr = start_server();
    let mut client = Client::connect(addr);
    let hello = client.next();
    assert_eq!(hello.op, "hello");
    assert_eq!(hello.payload["schemaVersion"], 1);

    let room = Room::parse(
        "9 7\nwwwwdwwww\nwfffffffw\nwfffffffw\ndfffffffd\nwfffffffw\nwfffffffw\nwwwwdwwww\n",
    )
    .unwrap();
    client.ok(
        "addRoom",
        json!({"id": 1, "room": RoomJson::from_room(&room)}),
    );
    let stroke = json!([{"row": 2, "col": 2}, {"row": 2, "col": 3}, {"row": 2, "col": 4}]);
    let painted = client.ok(
        "paintTiles",
        json!({"room": 1, "cells": stroke, "tile": "wall", "lock": true}),
    );
    assert_eq!(rows(&painted["room"])[2], "wfWWWfffw");
    client.ok("updateTarget", json!({"roomId": 1}));
    client.ok("start", json!({}));

    let broadcast = client.wait_for(|m| m.op == "elites");
    assert_eq!(broadcast.payload["full"], true);
    assert_eq!(rows(&broadcast.payload["target"])[2], "wfWWWfffw");
    let cells = broadcast.payload["cells"].as_array().unwrap().clone();
    for cell in &cells {
        if !cell["elite"].is_null() {
            assert!(rows(&cell["elite"]["room"])[2].get(2..5) == Some("WWW"));
        }
    }
    let chosen = cells
        .iter()
        .find(|c| !c["elite"].is_null())
        .expect("a filled cell")
        .clone();
    let applied = client.ok("applySuggestion", json!({"cell": chosen["cell"]}));
    let current = latest_elite(&client.seen, chosen["cell"].as_u64().unwrap());
    assert_eq!(applied["room"]["rows"], current);
    let chosen = json!({"elite": {"room": {"rows": current}}});

    let snapshot = client.ok("requestSnapshot", json!({}));
    assert_eq!(snapshot["target"]["rows"], chosen["elite"]["room"]["rows"]);
    for cell in snapshot["cells"].as_array().unwrap() {
        if !cell["elite"].is_null() {
            assert!(rows(&cell["elite"]["room"])[2].get(2..5) == Some("WWW"));
        }
    }

    let next = client.wait_for(|m| m.op == "elites");
    assert_eq!(next.payload["full"], false);
    assert_eq!(
        next.payload["target"]["rows"],
        chosen["elite"]["room"]["rows"]
    );
    client.ok("stop", json!({}));

    let generations: Vec<u64> = client
        .seen
        .iter()
        .filter(|m| m.kind == Kind::Event)
        .map(|m| m.generation.unwrap())
        .collect();
    assert!(
        generations.windows(2).all(|w| w[0] < w[1]),
        "{generations:?}"
    );
}

#[test]
fn second_client_is_refused_while_a_session_is_active() {
    let addr = start_server();
    let mut first = Client::connect(addr);
    assert_eq!(first.next().op, "hello");

    let mut second = Client::connect(addr);
    let refusal = second.next();
    assert_eq!(refusal.op, "connect");
    assert_eq!(refusal.error.unwrap().code, "session-busy");
    let mut line = String::new();
    assert_eq!(second.reader.read_line(&mut line).unwrap(), 0);

    assert_eq!(first.ok("getDungeon", json!({}))["rooms"], json!([]));
    drop(first);

    let deadline = Instant::now() + Duration::from_secs(10);
    loop {
        let mut third = Client::connect(addr);
        let msg = third.next();
        if msg.op == "hello" {
            break;
        }
        assert!(Instant::now() < deadline, "server never freed the session");
        thread::sleep(Duration::from_millis(20));
    }
}

#[test]
fn malformed_lines_do_not_end_the_session() {
    let addr = start_server();
    let mut client = Client::connect(addr);
    client.next();
    writeln!(client.writer, "{{\"kind\": 3}}").unwrap();
    let err = client.next();
    assert_eq!(err.error.unwrap().code, "malformed");
    assert_eq!(
        client.request("nope", json!({})).error.unwrap().code,
        "unknown-op"
    );
    client.ok("ping", json!({}));
}
