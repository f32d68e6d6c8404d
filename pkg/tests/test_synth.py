import numpy as np
import pytest

from mouseauth.errors import InvalidSpec
from mouseauth.ingest import SchemaMap, parse_session
from mouseauth.kinematics import velocity_sequence
from mouseauth.synth import (
    SplitMix64,
    SynthSpec,
    generate,
    generate_user_pool,
    to_session_csv,
)


def test_splitmix64_known_stream():
    # reference values computed from the published SplitMix64 constants
    rng = SplitMix64(0)
    first = [rng.next_u64() for _ in range(3)]
    assert first == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_generate_deterministic():
    spec = SynthSpec("gaussian_iid", {"mean": 10, "std": 1}, 500, seed=42)
    a = generate(spec)
    b = generate(spec)
    assert np.array_equal(a.v, b.v)


def test_gaussian_mean_law_of_large_numbers():
    spec = SynthSpec("gaussian_iid", {"mean": 10, "std": 1}, 10000, seed=1)
    vel = generate(spec)
    assert abs(vel.v.mean() - 10) < 0.05


def test_sine_without_noise_is_periodic():
    spec = SynthSpec(
        "sine_plus_noise",
        {"amplitude": 1.0, "period": 50, "noise_std": 0.0, "mean": 2.0},
        400,
        seed=0,
    )
    v = generate(spec).v
    assert np.allclose(v[:350], v[50:], atol=1e-12)


def test_speeds_clamped_nonnegative():
    spec = SynthSpec("gaussian_iid", {"mean": 0, "std": 5}, 1000, seed=2)
    assert np.all(generate(spec).v >= 0)


def test_ar1_lag1_autocorrelation():
    phi = 0.7
    spec = SynthSpec("ar1", {"phi": phi, "sigma": 1.0, "mean": 30.0}, 10000, seed=8)
    v = generate(spec).v
    x = v - v.mean()
    rho = float(np.dot(x[:-1], x[1:]) / np.dot(x, x))
    assert abs(rho - phi) < 0.05


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        generate(SynthSpec("ar1", {"phi": 1.2}, 100, seed=0))
    with pytest.raises(InvalidSpec):
        generate(SynthSpec("gaussian_iid", {"std": -1}, 100, seed=0))
    with pytest.raises(InvalidSpec):
        generate(SynthSpec("nope", {}, 100, seed=0))
    with pytest.raises(InvalidSpec):
        generate(SynthSpec("gaussian_iid", {}, 0, seed=0))


def test_user_pool_counts():
    specs = {
        f"u{i}": [
            SynthSpec("gaussian_iid", {"mean": 10, "std": 1}, 50, seed=10 * i + j)
            for j in range(2)
        ]
        for i in range(3)
    }
    pool = generate_user_pool(specs)
    assert sum(len(v) for v in pool.values()) == 6
    assert all(vel.user_id == user for user, vels in pool.items() for vel in vels)


def test_user_pool_empty_list_omitted():
    specs = {
        "a": [SynthSpec("gaussian_iid", {"mean": 5, "std": 1}, 50, seed=0)],
        "b": [],
    }
    pool = generate_user_pool(specs)
    assert set(pool) == {"a"}


def test_user_pool_disjoint_seeds_distinct():
    specs = {
        "a": [SynthSpec("gaussian_iid", {"mean": 5, "std": 1}, 50, seed=1)],
        "b": [SynthSpec("gaussian_iid", {"mean": 5, "std": 1}, 50, seed=2)],
    }
    pool = generate_user_pool(specs)
    assert not np.array_equal(pool["a"][0].v, pool["b"][0].v)


def test_user_pool_requires_users():
    with pytest.raises(InvalidSpec):
        generate_user_pool({})


def test_csv_round_trip():
    spec = SynthSpec("gaussian_iid", {"mean": 20, "std": 2}, 100, seed=5)
    vel = generate(spec, dt=0.01)
    text = to_session_csv(vel)
    schema = SchemaMap(timestamp_col="t", x_col="x", y_col="y")
    session, report = parse_session(text.encode(), schema, "u", "s")
    assert report.dropped == 0
    recovered = velocity_sequence(session, dt=0.01)
    assert np.allclose(recovered.v, vel.v, rtol=1e-9, atol=1e-9)
