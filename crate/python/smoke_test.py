"""Smoke test for the drlab extension module."""

import drlab


def main():
    cfg = drlab.SimConfig(n=120, w=20, repetitions=2, k=4, k_cfg=4, seed=3, avoidance=True)
    cfg.validate()
    assert cfg.n == 120 and cfg.avoidance
    assert drlab.SimConfig.from_text(cfg.to_text()).to_text() == cfg.to_text()

    first = drlab.run_simulation(cfg)
    second = drlab.run_simulation(cfg)
    assert first.csv() == second.csv()
    m = first.metrics()
    assert 0.0 <= m["eps"] <= 1.0 and 0.0 <= m["eps_prime"] <= 1.0
    assert m["bits_in"] == 6 * 120 * 20 * 2

    csv = drlab.sweep(3, values=[2, 3], base=cfg)
    assert csv.splitlines()[0].startswith("sweep_value,eps,eps_prime,cl")
    assert len(csv.splitlines()) == 3

    assert abs(drlab.compute_metrics(0.0, 0.3, 1, 1)[1] - 0.4) < 1e-12
    assert drlab.majority_decode([1, 0, 1]) == 1
    assert drlab.exact_decode([1, 0, 1]) is None
    assert abs(drlab.det_sq_exhaustive(2, 0.5) - 0.375) < 1e-12
    assert 0.45 < drlab.entropy_phi0(2000) / 2000 < 0.55

    stats = drlab.mitm_experiment(sessions=500)
    assert stats["honest_rate"] == 1.0

    try:
        drlab.SimConfig(n=11)
        drlab.run_simulation(drlab.SimConfig(n=11))
    except ValueError:
        pass
    else:
        raise AssertionError("odd n accepted")
    print("drlab smoke test passed")


if __name__ == "__main__":
    main()
