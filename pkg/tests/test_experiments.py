import pytest

from glassdyn.experiments import REGISTRY, list_experiments, run_experiment

SMALL = {
    "nonfreezing-cylinder": dict(replicas=5),
    "evenTree-tie": dict(replicas=5),
    "monotone-coupling": dict(replicas=5),
    "freeze-in-slices": dict(replicas=2),
    "unsat-forest": dict(replicas=3),
    "fixed-edge-consistency": dict(replicas=3),
    "torus-unique": dict(),
    "loop-budget": dict(replicas=20),
    "loop-terminal-gsp": dict(replicas=1, side=5),
    "loop-count-oracle": dict(),
    "cross-lemma": dict(replicas=5),
    "mass-transport": dict(replicas=1, side=64),
    "perturbation-margin": dict(replicas=1, edges=2),
    "strongly-freezing": dict(samples=500),
    "en-trend": dict(sizes=(4, 8), seeds=2, replicas=4),
    "tree-flip-gsp": dict(replicas=2),
    "majority-clusters": dict(replicas=2, depth=5),
}


def test_every_experiment_is_covered():
    assert set(SMALL) == set(REGISTRY)
    assert [r[0] for r in list_experiments()] == sorted(REGISTRY) or len(list_experiments()) == len(REGISTRY)


@pytest.mark.parametrize("name", sorted(SMALL))
def test_experiment_runs_small(name):
    res = run_experiment(name, **SMALL[name])
    assert res.name == name
    assert isinstance(res.passed, bool)
    assert res.rows
    assert res.summary_json().endswith("\n")
    header = res.runs_csv().splitlines()[0]
    assert header.startswith("replica")
