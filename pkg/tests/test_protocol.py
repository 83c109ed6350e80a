"""Wire schema: parse/encode round trips, error codes, framing."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posepilot.pose import N_ROWS
from posepilot.protocol import (
    MAX_FRAME_BYTES,
    PROTOCOL_VERSION,
    FrameSplitter,
    Hello,
    JoyAxes,
    ProtocolError,
    RunControl,
    SetMode,
    TlxSubmit,
    decode_payload,
    encode_frame,
    encode_payload,
    error_obj,
    frame_bytes,
    message_to_obj,
    obj_to_snapshot,
    parse_message,
    snapshot_to_obj,
)


def code_of(excinfo):
    return excinfo.value.code


class TestParseMessage:
    def test_version_gate(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 2, "kind": "joy_axes", "axes": [0, 0, 0, 0]})
        assert code_of(ei) == "bad_version"
        with pytest.raises(ProtocolError) as ei:
            parse_message({"kind": "joy_axes", "axes": [0, 0, 0, 0]})
        assert code_of(ei) == "bad_version"

    def test_unknown_kind(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "telemetry"})  # outbound only
        assert code_of(ei) == "unknown_kind"

    def test_non_object(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message([1, 2, 3])
        assert code_of(ei) == "bad_payload"

    def test_axis_count(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "joy_axes", "axes": [0, 0, 0]})
        assert code_of(ei) == "axis_count"

    def test_non_finite_axis(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "joy_axes", "axes": [0, 0, 0, "x"]})
        assert code_of(ei) == "bad_payload"

    def test_keypoints_out_of_range_coordinate(self):
        pts = [[0.5, 0.5]] * N_ROWS
        pts[3] = [1.5, 0.5]
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "keypoints", "points": pts})
        assert code_of(ei) == "range"

    def test_keypoints_wrong_row_count(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "keypoints", "points": [[0.5, 0.5]] * 5})
        assert code_of(ei) == "bad_payload"

    def test_tlx_rating_range(self):
        ratings = {k: 10 for k in ("mental", "physical", "temporal",
                                   "performance", "effort", "frustration")}
        ratings["effort"] = 21
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "tlx_submit", "participant": "p1",
                           "modality": "pose", "ratings": ratings})
        assert code_of(ei) == "range"

    def test_bad_ts(self):
        with pytest.raises(ProtocolError) as ei:
            parse_message({"v": 1, "kind": "set_mode", "modality": "pose",
                           "ts": math.inf})
        assert code_of(ei) == "bad_payload"

    def test_happy_paths(self):
        m = parse_message({"v": 1, "kind": "hello", "client": "cockpit", "token": "s3cret"})
        assert isinstance(m, Hello) and m.token == "s3cret"
        m = parse_message({"v": 1, "kind": "joy_axes", "axes": [0.1, -0.2, 0.3, 1.0],
                           "ts": 12.5})
        assert isinstance(m, JoyAxes) and m.ts == 12.5
        m = parse_message({"v": 1, "kind": "set_mode", "modality": "joystick"})
        assert isinstance(m, SetMode)
        m = parse_message({"v": 1, "kind": "run_control", "action": "pause"})
        assert isinstance(m, RunControl)


finite = st.floats(allow_nan=False, allow_infinity=False, width=32)


class TestRoundTrips:
    @given(axes=st.lists(finite, min_size=4, max_size=4),
           ts=st.one_of(st.none(), st.floats(0, 1e6)))
    @settings(max_examples=120, deadline=None)
    def test_joy_axes(self, axes, ts):
        obj = {"v": 1, "kind": "joy_axes", "axes": axes}
        if ts is not None:
            obj["ts"] = ts
        msg = parse_message(obj)
        again = parse_message(json.loads(encode_payload(message_to_obj(msg))))
        assert again == msg

    @given(pts=st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)),
                        min_size=N_ROWS, max_size=N_ROWS),
           nvalid=st.integers(0, N_ROWS))
    @settings(max_examples=60, deadline=None)
    def test_keypoints(self, pts, nvalid):
        valid = [i < nvalid for i in range(N_ROWS)]
        obj = {"v": 1, "kind": "keypoints", "points": [list(p) for p in pts],
               "valid": valid, "ts": 1.0}
        msg = parse_message(obj)
        again = parse_message(json.loads(encode_payload(message_to_obj(msg))))
        assert again == msg

    @given(ratings=st.lists(st.floats(0, 20), min_size=6, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_tlx(self, ratings):
        keys = ("mental", "physical", "temporal", "performance", "effort", "frustration")
        obj = {"v": 1, "kind": "tlx_submit", "participant": "p9", "modality": "joystick",
               "ratings": dict(zip(keys, ratings))}
        msg = parse_message(obj)
        assert isinstance(msg, TlxSubmit)
        again = parse_message(json.loads(encode_payload(message_to_obj(msg))))
        assert again == msg

    def test_snapshot_round_trip(self, config, corridor):
        from posepilot.session import Session
        s = Session(config, corridor)
        s.offer_axes([0.1, 0.2, 0.3, 0.4], ts=9.75)
        snap = s.tick()
        obj = json.loads(encode_payload(snapshot_to_obj(snap)))
        back = obj_to_snapshot(obj)
        assert back == snap

    def test_snapshot_round_trip_with_hands_and_events(self, config, corridor):
        from posepilot.pose import keypoint_frame
        from posepilot.session import Session
        s = Session(config, corridor, modality="pose")
        s.offer_keypoints(keypoint_frame([[0.25, 0.5]] * 10 + [[0.75, 0.5]] * 6))
        snap = s.tick()
        assert snap.hands is not None
        back = obj_to_snapshot(json.loads(encode_payload(snapshot_to_obj(snap))))
        assert back == snap


class TestFraming:
    def test_payload_codec(self):
        obj = error_obj("range", "nope")
        assert decode_payload(encode_payload(obj)) == obj

    def test_decode_rejects_non_json(self):
        with pytest.raises(ProtocolError) as ei:
            decode_payload(b"\xff\xfe")
        assert code_of(ei) == "bad_json"
        with pytest.raises(ProtocolError) as ei:
            decode_payload(b"[1, 2]")
        assert code_of(ei) == "bad_payload"

    def test_encode_frame_length_prefix(self):
        payload = encode_payload({"v": 1, "kind": "hello", "client": ""})
        framed = encode_frame({"v": 1, "kind": "hello", "client": ""})
        assert framed[:4] == len(payload).to_bytes(4, "big")
        assert framed[4:] == payload

    def test_encode_frame_too_large(self):
        with pytest.raises(ProtocolError) as ei:
            encode_frame({"v": 1, "kind": "hello", "client": "x" * (MAX_FRAME_BYTES + 1)})
        assert code_of(ei) == "too_large"

    def test_splitter_handles_fragmentation_and_coalescing(self):
        frames = [encode_frame(error_obj("range", f"m{i}")) for i in range(5)]
        stream = b"".join(frames)
        sp = FrameSplitter()
        got = []
        for i in range(0, len(stream), 3):  # drip-feed 3 bytes at a time
            got.extend(sp.feed(stream[i:i + 3]))
        assert len(got) == 5
        assert [json.loads(g)["detail"] for g in got] == [f"m{i}" for i in range(5)]

    def test_splitter_rejects_oversized_header(self):
        sp = FrameSplitter(limit=64)
        with pytest.raises(ProtocolError) as ei:
            sp.feed((1000).to_bytes(4, "big"))
        assert code_of(ei) == "too_large"
