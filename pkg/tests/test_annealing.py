import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from pbitnet.annealing import (AnnealSchedule, QuantumIsingSpec, TspInstance, anneal,
                               brute_force_tsp, canonical_tour, decode_tour, encode_tour,
                               ground_states, pimc_map, qubo_to_network,
                               quantum_anneal, quantum_hamiltonian, quantum_thermal_averages,
                               replica_coupling, replica_exact_averages, sample_pimc,
                               solve_tsp, tsp_encode)
from pbitnet.exact import energy, enumerate_states
from pbitnet.network import NetworkSpec, SpecError, StateVector, all_states, state_index

from conftest import random_symmetric

EXACT_ZZ = 0.6835042971456452   # 2-spin J=1, gamma=0.5, beta=1


def pentagon_instance():
    ang = np.deg2rad([90, 162, 306, 234, 378])
    xy = np.c_[np.cos(ang), np.sin(ang)]
    xy[2] *= 1.1
    xy[4] *= 0.95
    return TspInstance.from_coordinates(xy)


def two_spin(n_replicas=10, gamma=0.5, beta=1.0):
    return QuantumIsingSpec.from_triplets(2, [(0, 1, 1.0)], gamma=gamma, beta=beta,
                                          n_replicas=n_replicas)


THREE_SPIN = dict(n=3, triplets=[(0, 1, 0.8), (1, 2, -0.5), (0, 2, 0.3)],
                  h_z=[0.2, 0.0, -0.1], gamma=0.7, beta=1.5)


def three_spin(n_replicas):
    d = dict(THREE_SPIN)
    return QuantumIsingSpec.from_triplets(d.pop("n"), d.pop("triplets"), n_replicas=n_replicas, **d)


class TestSchedule:
    def test_validation(self):
        for kw in ({"I0_initial": 0}, {"growth": 1.0}, {"t_eq": 0}, {"stages": 0}):
            with pytest.raises(SpecError):
                AnnealSchedule(**kw)

    def test_strictly_increasing(self):
        s = AnnealSchedule().scales()
        assert s[0] == 0.1
        assert np.all(np.diff(s) > 0)
        assert s[1] / s[0] == pytest.approx(1 / 0.99)

    def test_stage_best_non_increasing(self):
        spec = random_symmetric(10, 5)
        res = anneal(spec, AnnealSchedule(stages=100, t_eq=5), seed=1)
        assert np.all(np.diff(res.stage_best) <= 0)
        assert res.best_energy == pytest.approx(res.stage_best[-1])
        assert res.best_energy == pytest.approx(energy(spec, res.best))


class TestAnneal:
    def test_biased_bit(self):
        res = anneal(NetworkSpec(n=1, biases=(-0.3,)), AnnealSchedule(t_eq=2), seed=2)
        assert res.last.m[0] == -1 and res.best.m[0] == -1

    def test_ferromagnet_aligns(self, ferro2):
        sched = AnnealSchedule(stages=300, t_eq=5)
        res = anneal(ferro2, sched, seed=3)
        assert res.last.m[0] == res.last.m[1]
        # unit-scale energy is -w; at the final scale it is -I0_final * w
        assert res.best_energy == -1.0
        assert res.best_energy * sched.scales()[-1] == pytest.approx(-sched.scales()[-1])

    def test_finds_ground_state(self):
        spec = random_symmetric(12, 8)
        e0, _ = ground_states(spec)
        res = anneal(spec, AnnealSchedule(stages=300, t_eq=10), seed=0)
        assert res.best_energy == pytest.approx(e0)

    def test_rejects_directed(self):
        with pytest.raises(SpecError):
            anneal(NetworkSpec(n=2, weights=((0, 1, 1.0),), symmetric=False), AnnealSchedule())

    def test_clamps_respected(self):
        spec = random_symmetric(6, 2).with_clamps({0: -1})
        res = anneal(spec, AnnealSchedule(stages=50, t_eq=5), seed=4)
        assert res.best.m[0] == -1 and res.last.m[0] == -1


class TestQubo:
    def test_energy_matches_objective(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=5)
        Q = rng.normal(size=(5, 5))
        spec, c = qubo_to_network(a, Q, offset=0.7)
        for x in itertools.product((0, 1), repeat=5):
            x = np.array(x)
            H = 0.7 + a @ x + x @ np.triu(Q, 1) @ x
            assert energy(spec, 2 * x - 1) + c == pytest.approx(H, abs=1e-12)


class TestTsp:
    def test_sizes(self):
        spec, dec = tsp_encode(pentagon_instance())
        assert spec.n == 16 and dec.side == 4
        with pytest.raises(SpecError):
            tsp_encode(TspInstance(np.zeros((2, 2))))

    def test_instance_validation(self):
        with pytest.raises(SpecError):
            TspInstance(np.array([[0, 1], [2, 0]]))

    def test_decode_examples(self):
        _, dec = tsp_encode(pentagon_instance())
        assert not decode_tour(-np.ones(16), dec).valid
        assert decode_tour(-np.ones(16), dec).row_violations == 4
        assert decode_tour(encode_tour((1, 2, 3, 4), dec), dec).order == (1, 2, 3, 4)
        m = -np.ones(16, dtype=np.int8)
        for p, c in [(1, 1), (2, 3), (3, 2), (4, 4)]:
            m[dec.index(p, c)] = 1
        assert decode_tour(m, dec).order == (1, 3, 2, 4)

    @pytest.mark.parametrize("seed", range(3))
    def test_encoding_soundness_n4(self, seed):
        rng = np.random.default_rng(seed)
        inst = TspInstance.from_coordinates(rng.uniform(size=(4, 2)))
        spec, dec = tsp_encode(inst)
        E = enumerate_states(spec).energies
        valid_E = {}
        for k in range(1 << spec.n):
            tour = decode_tour(StateVector.from_index(k, spec.n), dec)
            if tour.valid:
                valid_E[k] = E[k]
                expected = dec.B * inst.tour_length(tour.order) - dec.constant
                assert E[k] == pytest.approx(expected, abs=1e-9)
        assert len(valid_E) == 6
        invalid = np.delete(E, list(valid_E))
        assert invalid.min() > max(valid_E.values())
        best = min(valid_E, key=valid_E.get)
        opt = brute_force_tsp(inst)[0][1]
        assert canonical_tour(decode_tour(StateVector.from_index(best, spec.n), dec).order) == opt

    def test_equilateral_degenerate(self):
        inst = TspInstance(np.ones((3, 3)) - np.eye(3))
        spec, dec = tsp_encode(inst)
        e0, ks = ground_states(spec)
        tours = {decode_tour(StateVector.from_index(k, 4), dec).order for k in ks}
        assert tours == {(1, 2), (2, 1)}

    def test_fixture_optimum_is_ground_state(self):
        inst = pentagon_instance()
        ranked = brute_force_tsp(inst)
        assert len(ranked) == 12
        assert ranked[0][1] == (1, 3, 2, 4)
        assert ranked[1][0] - ranked[0][0] > 1.0
        spec, dec = tsp_encode(inst)
        _, ks = ground_states(spec)
        assert len(ks) == 2  # one tour, two directions
        for k in ks:
            assert canonical_tour(decode_tour(StateVector.from_index(k, 16), dec).order) == (1, 3, 2, 4)

    @pytest.mark.slow
    def test_solve_fixture(self):
        res = solve_tsp(pentagon_instance(), runs=20, seed=7)
        assert all(t.valid for t, _ in res)
        hits = sum(canonical_tour(t.order) == (1, 3, 2, 4) for t, _ in res)
        assert hits >= 16


class TestPimcMap:
    def test_coupling_formula(self):
        assert replica_coupling(1.0, 0.5, 10) == pytest.approx(0.5 * math.log(1 / math.tanh(0.05)))
        with pytest.raises(SpecError):
            replica_coupling(1.0, 0.0, 10)

    def test_structure(self):
        q = two_spin()
        spec, layout = pimc_map(q)
        W = np.asarray(spec.W)
        assert spec.n == 20 and spec.symmetric
        assert W[layout.index(0, 3), layout.index(1, 3)] == pytest.approx(0.1)
        Jp = replica_coupling(1.0, 0.5, 10)
        assert W[layout.index(0, 9), layout.index(0, 0)] == pytest.approx(Jp)
        assert W[layout.index(0, 2), layout.index(1, 3)] == 0

    def test_zero_gamma_rejected(self):
        with pytest.raises(SpecError):
            pimc_map(two_spin(gamma=0.0))

    def test_spec_validation(self):
        with pytest.raises(SpecError):
            QuantumIsingSpec(2, np.array([[0, 1], [2, 0]]), None, 0.5, 1.0)
        with pytest.raises(SpecError):
            two_spin(n_replicas=1)

    def test_hamiltonian_against_kron(self):
        q = three_spin(4)
        X = np.array([[0, 1], [1, 0]])
        Z = np.diag([1.0, -1.0])
        I = np.eye(2)

        def op(mat, i):
            mats = [mat if k == i else I for k in range(3)]
            return np.kron(np.kron(mats[0], mats[1]), mats[2])

        H = sum(-q.J[i, j] * op(Z, i) @ op(Z, j) for i in range(3) for j in range(i + 1, 3))
        H = H + sum(-q.h_z[i] * op(Z, i) - q.gamma * op(X, i) for i in range(3))
        np.testing.assert_allclose(quantum_hamiltonian(q), H, atol=1e-14)

    def test_exact_oracle_by_expm(self):
        q = two_spin()
        rho = expm(-q.beta * quantum_hamiltonian(q))
        rho /= np.trace(rho)
        zz = np.diag(rho) @ np.array([1, -1, -1, 1])
        assert zz == pytest.approx(EXACT_ZZ, rel=1e-12)
        assert quantum_thermal_averages(q)["zz"][0, 1] == pytest.approx(EXACT_ZZ, rel=1e-12)

    def test_transfer_matrix_matches_enumeration(self):
        for q in (two_spin(6), three_spin(4)):
            spec, layout = pimc_map(q)
            P = enumerate_states(spec).probabilities
            states = all_states(spec.n).astype(float)
            s = layout.slices(states)
            zz = np.einsum("a,aki,akj->ij", P, s, s) / layout.n_replicas
            mz = np.einsum("a,aki->i", P, s) / layout.n_replicas
            ref = replica_exact_averages(q)
            np.testing.assert_allclose(zz, ref["zz"], atol=1e-10)
            np.testing.assert_allclose(mz, ref["mz"], atol=1e-10)

    @pytest.mark.parametrize("make", [lambda n: QuantumIsingSpec(1, np.zeros((1, 1)), [0.3],
                                                                 0.8, 2.0, n),
                                      two_spin, three_spin])
    def test_convergence_in_replicas(self, make):
        exact = quantum_thermal_averages(make(2))
        errs = []
        for n in (10, 20):
            approx = replica_exact_averages(make(n))
            err = max(np.max(np.abs(approx["zz"] - exact["zz"])),
                      np.max(np.abs(approx["mz"] - exact["mz"])))
            errs.append(err / max(np.max(np.abs(exact["zz"][~np.eye(len(exact["mz"]), dtype=bool)]),
                                         initial=0), np.max(np.abs(exact["mz"])), 1e-3))
        assert errs[1] < errs[0]
        assert errs[0] < 0.05 and errs[1] < 0.025

    def test_two_spin_regression(self):
        assert replica_exact_averages(two_spin(10))["zz"][0, 1] == pytest.approx(0.6844902378, rel=1e-8)
        assert replica_exact_averages(two_spin(20))["zz"][0, 1] == pytest.approx(0.6837512, rel=1e-6)

    def test_small_gamma_is_classical(self):
        q = three_spin(10)
        q = QuantumIsingSpec(q.n_spins, q.J, q.h_z, 1e-4, q.beta, 10)
        classical = enumerate_states(q.classical().scaled(q.beta))
        s = all_states(3).astype(float)
        P = classical.probabilities
        np.testing.assert_allclose(replica_exact_averages(q)["zz"], s.T @ (P[:, None] * s),
                                   atol=1e-5)

    def test_single_spin_symmetric(self):
        q = QuantumIsingSpec(1, np.zeros((1, 1)), [0.0], 0.9, 1.0, 8)
        assert replica_exact_averages(q)["mz"][0] == pytest.approx(0.0, abs=1e-12)
        obs, _ = sample_pimc(q, 50_000, seed=2)
        assert abs(obs["mz"][0]) < 0.03

    @pytest.mark.slow
    def test_sampled_two_spin(self):
        obs, trace = sample_pimc(two_spin(10), 10**6, seed=1)
        assert obs["zz"][0, 1] == pytest.approx(EXACT_ZZ, rel=0.05)
        # ring coupling is uniform, so every slice sees the same statistics
        spec, layout = pimc_map(two_spin(10))
        s = layout.slices(trace.states).astype(float)
        per_slice = np.mean(s[:, :, 0] * s[:, :, 1], axis=0)
        assert np.ptp(per_slice) < 0.03


FRUSTRATED = QuantumIsingSpec.from_triplets(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, -1)],
                                            gamma=3.0, beta=4.0, n_replicas=8)


class TestQuantumAnneal:
    def test_schedule_errors(self):
        q = two_spin()
        for sched in ([], [0.5, 0.0], [0.1, 0.5], [0.5, 0.5]):
            with pytest.raises(SpecError):
                quantum_anneal(q, sched)

    def test_biased_spin(self):
        q = QuantumIsingSpec(1, np.zeros((1, 1)), [-0.8], 2.0, 5.0, 8)
        res = quantum_anneal(q, np.geomspace(2.0, 0.01, 30), seed=1)
        assert res.state.m[0] == -1
        assert res.replicas.shape == (8, 1)

    def test_frustrated_ring(self):
        e0, gs = ground_states(FRUSTRATED.classical())
        assert e0 == -2.0 and len(gs) == 8
        hits = 0
        for seed in range(20):
            res = quantum_anneal(FRUSTRATED, np.geomspace(3.0, 0.01, 40), seed=seed)
            hits += int(state_index(res.state) in gs)
        assert hits >= 14
