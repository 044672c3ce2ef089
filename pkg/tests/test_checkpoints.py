import json
import os

import pytest

from primebounds.checkpoints import CHECKPOINT_ENV, CheckpointError, CheckpointStore, decode, encode
from primebounds.sieve import scan


def test_round_trip_is_bit_exact():
    cp = scan(123457)
    back = decode(encode(cp))
    assert back == cp
    assert back.theta_x.hex() == cp.theta_x.hex()


def test_checksum_detects_tampering():
    rec = json.loads(encode(scan(1000)))
    rec["pi_x"] += 1
    with pytest.raises(CheckpointError):
        decode(json.dumps(rec))


def test_version_checked():
    rec = json.loads(encode(scan(1000)))
    rec.pop("checksum")
    rec["version"] = 99
    from primebounds.checkpoints import _checksum

    rec["checksum"] = _checksum(rec)
    with pytest.raises(CheckpointError):
        decode(json.dumps(rec))


def test_store_append_and_reload(tmp_path):
    path = tmp_path / "c.jsonl"
    s = CheckpointStore(path)
    scan(300000, store=s, cadence=100000)
    assert [cp.x for cp in s] == [100000, 200000, 300000]
    s.append(s.latest())  # duplicates are ignored
    again = CheckpointStore(path)
    assert list(again) == list(s)
    assert again.latest(at_most=250000).x == 200000
    assert again.latest(at_most=5) is None


def test_resume_from_store_matches_fresh(tmp_path):
    s = CheckpointStore(tmp_path / "c.jsonl")
    scan(500000, store=s, cadence=100000)
    resumed = scan(900000, store=s, cadence=100000)
    assert resumed == scan(900000, cadence=None)


def test_write_failure_reports_last_durable(tmp_path):
    s = CheckpointStore(tmp_path / "c.jsonl")
    scan(200000, store=s, cadence=100000)
    os.chmod(tmp_path, 0o500)
    bad = CheckpointStore.__new__(CheckpointStore)
    bad.path = tmp_path / "missing" / "x.jsonl"
    bad._records = list(s)
    try:
        with pytest.raises(CheckpointError) as err:
            scan(300000, store=bad, cadence=100000)
        assert err.value.last_durable.x == 200000
    finally:
        os.chmod(tmp_path, 0o700)


def test_env_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(CHECKPOINT_ENV, str(tmp_path / "cps"))
    s = CheckpointStore.in_dir()
    assert s.path.parent == tmp_path / "cps"
