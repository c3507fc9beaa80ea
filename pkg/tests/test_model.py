"""Network forward/backward correctness and checkpoint persistence."""

import numpy as np
import pytest

from pathnli.errors import ModelError
from pathnli.kg import load_triples
from pathnli.embeddings import init_embeddings
from pathnli.model.network import (backward, canonical_premise, forward,
                                   instance_loss, predict)
from pathnli.model.params import (init_model, load_checkpoint,
                                  save_checkpoint)

from util import max_relative_error, numeric_grad, random_instance


def _grad_fixture(seed=0, d_in=5, d_h=4, n_paths=2, path_tokens=3):
    kg = load_triples([f"e{i}|r{i % 5}|e{i + 1}" for i in range(11)])
    table = init_embeddings(kg, d_in, seed=seed)
    params = init_model(d_in, d_h, seed=seed)
    rng = np.random.default_rng(seed + 10)
    inst = random_instance(rng, n_entities=kg.n_entities,
                           n_relations=kg.n_relations, n_paths=n_paths,
                           path_tokens=path_tokens)
    return kg, table, params, inst


def test_probabilities_are_a_distribution():
    _, table, params, inst = _grad_fixture()
    probs = predict(params, table, inst)
    assert probs.shape == (2,)
    assert np.all(probs > 0)
    assert abs(float(probs.sum()) - 1.0) < 1e-12


def test_attention_weights_sum_to_one():
    _, table, params, inst = _grad_fixture(n_paths=5)
    trace = forward(params, table, inst)
    assert trace.weights.shape == (5,)
    assert abs(float(trace.weights.sum()) - 1.0) < 1e-12


def test_prediction_ignores_premise_order():
    _, table, params, inst = _grad_fixture(n_paths=4)
    base = predict(params, table, inst)
    rng = np.random.default_rng(0)
    for _ in range(10):
        perm = rng.permutation(len(inst.premise))
        shuffled = inst.__class__(inst.qid, inst.candidate,
                                  tuple(inst.premise[i] for i in perm),
                                  inst.hypothesis, inst.label)
        assert np.array_equal(predict(params, table, shuffled), base)


def test_canonical_premise_is_permutation_invariant():
    rng = np.random.default_rng(4)
    inst = random_instance(rng, n_paths=5)
    perm = rng.permutation(5)
    shuffled = tuple(inst.premise[i] for i in perm)
    assert canonical_premise(shuffled) == canonical_premise(inst.premise)


def test_every_parameter_gradient_matches_finite_differences():
    _, table, params, inst = _grad_fixture()

    def loss():
        return instance_loss(params, table, inst)

    trace = forward(params, table, inst)
    grads, _ = backward(params, trace, inst.label)
    tensors = params.named_tensors()
    assert set(grads) == set(tensors)
    for name, tensor in tensors.items():
        err = max_relative_error(grads[name], numeric_grad(loss, tensor),
                                 floor=1e-4)
        assert err < 1e-4, f"{name}: {err}"


def test_embedding_gradients_match_finite_differences():
    _, table, params, inst = _grad_fixture(seed=2)

    def loss():
        return instance_loss(params, table, inst)

    trace = forward(params, table, inst)
    _, egrads = backward(params, trace, inst.label,
                         want_embedding_grads=True)
    assert egrads
    for (kind, tid), g in egrads.items():
        vec = table.entity_vecs[tid] if kind == "e" else table.relation_vecs[tid]
        err = max_relative_error(g, numeric_grad(loss, vec), floor=1e-4)
        assert err < 1e-4, f"{kind}{tid}: {err}"


def test_dropout_is_inverted_and_seeded():
    _, table, params, inst = _grad_fixture()
    t1 = forward(params, table, inst, dropout=0.5,
                 rng=np.random.default_rng(7))
    t2 = forward(params, table, inst, dropout=0.5,
                 rng=np.random.default_rng(7))
    assert np.array_equal(t1.mask, t2.mask)
    kept = t1.mask > 0
    assert np.all(np.isin(t1.mask, (0.0, 2.0)))
    assert np.array_equal(t1.A_drop[kept], (t1.A * t1.mask)[kept])
    clean = forward(params, table, inst)
    assert np.array_equal(clean.A_drop, clean.A)


def test_checkpoint_round_trip_and_determinism(tmp_path):
    _, _, params, _ = _grad_fixture()
    p1 = tmp_path / "m1.bin"
    p2 = tmp_path / "m2.bin"
    save_checkpoint(str(p1), params, {"note": "x"})
    save_checkpoint(str(p2), params, {"note": "x"})
    assert p1.read_bytes() == p2.read_bytes()
    back, meta = load_checkpoint(str(p1))
    assert meta["note"] == "x"
    for name, tensor in params.named_tensors().items():
        assert np.array_equal(back.named_tensors()[name], tensor)


def test_corrupted_checkpoint_is_rejected(tmp_path):
    _, _, params, _ = _grad_fixture()
    path = tmp_path / "m.bin"
    save_checkpoint(str(path), params, None)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(ModelError):
        load_checkpoint(str(path))
    path.write_bytes(b"JUNK" + data)
    with pytest.raises(ModelError):
        load_checkpoint(str(path))
