import json
import math

import pytest

import aumcf

TOY = """id,time,status,arm
s1,2,1,1
s1,5,1,1
s1,10,2,1
s2,3,1,1
s2,8,0,1
s3,12,0,1
t1,3,1,2
t1,6,1,2
t1,10,2,2
t2,4,1,2
t2,8,0,2
t3,12,0,2
"""


@pytest.fixture
def toy_path(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text(TOY)
    return str(path)


def test_point_estimates(toy_path):
    study = aumcf.read_csv(toy_path, tau=12)
    assert len(study.arm1) == 3 and study.n == 6
    assert aumcf.aumcf(study.arm1, 12) == pytest.approx(26 / 3, rel=1e-14)
    assert aumcf.aumcf(study.arm2, 12) == pytest.approx(23 / 3, rel=1e-14)
    est = aumcf.estimate(study.arm1, 12)
    assert est["theta"] == pytest.approx(26 / 3)
    assert est["ci_lower"] < est["theta"] < est["ci_upper"]


def test_curves(toy_path):
    study = aumcf.read_csv(toy_path, tau=12)
    times, values = aumcf.mcf(study.arm1)
    assert times == [0, 2, 3, 5]
    assert values == pytest.approx([0, 1 / 3, 2 / 3, 1])
    times, values = aumcf.km(study.arm1)
    assert times == [0, 10] and values == [1, 0.5]
    assert aumcf.rmst(study.arm1, 12) == pytest.approx(11)


def test_contrasts(toy_path):
    study = aumcf.read_csv(toy_path, tau=12)
    diff = aumcf.compare(study)
    assert diff["point"] == pytest.approx(1.0)
    assert diff["ci_lower"] < 1.0 < diff["ci_upper"]
    ratio = aumcf.compare(study, contrast="ratio")
    assert ratio["point"] == pytest.approx(26 / 23)
    assert "log_se" in ratio
    psi = aumcf.influence_values(study.arm1, 12)
    assert abs(sum(psi)) < 1e-9


def test_records_and_errors():
    study = aumcf.from_records(
        ids=["a", "a", "b", "c", "c"],
        times=[1.0, 4.0, 6.0, 2.0, 5.0],
        statuses=[1, 2, 0, 1, 0],
        arms=[1, 1, 1, 2, 2],
        tau=4.0,
    )
    assert len(study.arm1) == 2 and len(study.arm2) == 1
    assert aumcf.aumcf(study.arm1, 4.0) == pytest.approx(3.0 / 2.0)
    with pytest.raises(aumcf.AumcfError) as info:
        aumcf.from_records(["a"], [1.0], [1], [1], tau=4.0)
    assert info.value.code == "missing_terminal_record"
    assert info.value.kind == "validation"
    assert aumcf.time_lost(24, False, [6, 12], 24) == 30
    assert aumcf.time_lost(18, True, [6, 18], 24) == 24


def test_augmentation():
    config = "covariate_mode = informative\nn_per_arm = 150\n"
    study = aumcf.generate_dataset(config, replicate=2)
    assert study == aumcf.generate_dataset(config, replicate=2)
    assert study.arm1.covariate_dim == 1
    res = aumcf.augmented_compare(study)
    assert res["adjusted"]["se"] <= res["unadjusted"]["se"]
    assert res["relative_efficiency"] >= 1.0
    assert len(res["beta"]) == 1


def test_simulation_and_bootstrap():
    config = "scenario = icr\nn_per_arm = 50\nreplicates = 20\nseed = 5\n"
    a = aumcf.simulate(config, threads=1)
    b = aumcf.simulate(config, threads=2)
    assert a == b
    row = a["results"][0]
    assert row["method"] == "unadjusted" and row["replicates"] == 20
    assert a["truth"]["delta"] == 0.0
    truth = aumcf.true_values("lambda_d1 = 0.2\nlambda_d2 = 0.2\n")
    assert truth["theta1"] == pytest.approx(1 / 0.2 - (1 - math.exp(-0.2)) / 0.04)
    study = aumcf.generate_dataset(config, 0)
    se = aumcf.bootstrap_se(study, 200, seed=1)
    assert se == aumcf.bootstrap_se(study, 200, seed=1)
    assert se == pytest.approx(aumcf.compare(study)["se"], rel=0.25)
    with pytest.raises(aumcf.AumcfError):
        aumcf.simulate("scenario = weibull\n")


def test_cli_in_process(toy_path):
    code, out, err = aumcf.run_cli(["estimate", toy_path, "--tau", "12"])
    assert code == 0 and err == ""
    report = json.loads(out)
    assert report["estimates"][0]["theta"] == pytest.approx(26 / 3)
    code, out, err = aumcf.run_cli(["estimate", toy_path, "--tau", "20", "--strict-tau"])
    assert code == 2
    assert json.loads(err)["error"]["code"] == "tau_not_identifiable"
