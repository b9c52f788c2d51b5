"""Smoke test for the infrasense_py extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/infrasense_py-*.whl

then run `python python/smoke_test.py`.
"""

import math
import tempfile
from pathlib import Path

import infrasense_py as ix


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print(f"ok  {what}")


def main():
    # transforms
    x = [math.sin(0.37 * i) + 0.1 * (i % 7) for i in range(300)]
    approx, details = ix.wavedec(x, 3, "db4")
    y = ix.waverec(approx, details, len(x), "db4")
    check(max(abs(a - b) for a, b in zip(x, y)) < 1e-9, "wavedec/waverec roundtrip")
    check(max(abs(a - b) for a, b in zip(x, ix.swt_band(x, 3))) < 1e-9, "swt full-band reconstruction")
    imfs, residue = ix.emd(x)
    total = [r + sum(imf[i] for imf in imfs) for i, r in enumerate(residue)]
    check(max(abs(a - b) for a, b in zip(x, total)) < 1e-9, "emd completeness")

    feats = dict(ix.features([1.0, -1.0, 1.0, -1.0]))
    check(feats["kurtosis"] == 1.0 and feats["energy"] == 2.0, "features of [1,-1,1,-1]")
    check(abs(ix.cant_angle(150.0) - math.asin(0.1)) < 1e-12, "cant angle")
    try:
        ix.cant_angle(2000.0)
        raise AssertionError("cant domain error not raised")
    except ix.InfrasenseError as e:
        check(str(e).startswith("domain"), "cant domain error")

    flat = ix.simulate_quarter_car([0.0] * 201, 0.5, 10.0)
    check(max(abs(v) for v in flat) < 1e-9, "quarter-car at rest on a flat road")

    # synthetic ride through the road pipeline
    trace = ix.Trace.synthesize(
        """
duration = 40.0
speed = 10.0
noise = 0.05
seed = 1
[[pulses]]
position = 200.0
length = 0.5
depth = -0.05
"""
    )
    check(len(trace) == 4001 and trace.has_gyro, f"synthesized {trace!r}")
    result = ix.analyze(trace, ix.Config())
    anomalies = [i for i in result.indicators if i.kind == "anomaly"]
    check(len(anomalies) == 1 and abs(anomalies[0].t - 20.0) < 1.0, f"pothole found: {anomalies}")
    check(len(result.roughness()) == 4, "roughness segments")

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "ride.csv"
        path.write_text(trace.to_csv())
        again = ix.analyze(ix.Trace.load(str(path)))
        pairs = list(zip(again.indicators, result.indicators))
        check(
            len(again.indicators) == len(result.indicators) and all(abs(p.t - q.t) < 1e-6 for p, q in pairs),
            "csv reload gives same indicators",
        )

    try:
        ix.Config('context = "rail"\n[road.anomaly]\nk = 4.0\n')
        raise AssertionError("misplaced block accepted")
    except ix.InfrasenseError as e:
        check("`road`" in str(e), "misplaced config block rejected")

    # aggregation
    store = ix.SegmentStore()
    a = store.add(anomalies[0])
    b = store.add(anomalies[0])
    check(a == b and len(store) == 1, "same indicator fuses into one anchor")
    snap = store.snapshot()
    check(snap["features"][0]["properties"]["contribution_count"] == 2, "snapshot geojson")

    # dissemination
    lat, lon = anomalies[0].lat, anomalies[0].lon
    ssid = ix.encode_packet((lat, lon), [(lat, lon, 0, 9, 0.8)])
    check(len(ssid) == 32, "ssid is 32 characters")
    packet = ix.decode_packet(ssid)
    check(packet["entries"][0]["severity"] == 9, "decode roundtrip")

    scenario = "\n".join(
        [
            f'{{"id": "a", "waypoints": [[0, {lat}, {lon}]], "phase": 0, "packets": ["{ssid}"]}}',
            f'{{"id": "b", "waypoints": [[0, {lat + 0.0002}, {lon}]], "phase": 5}}',
        ]
    )
    log = ix.simulate(scenario, seed=3, duration=30.0)
    check(any(to == "b" for _, _, to, _ in log), "beacon delivered to neighbour")
    check(log == ix.simulate(scenario, seed=3, duration=30.0), "simulation deterministic")
    print("smoke test passed")


if __name__ == "__main__":
    main()
