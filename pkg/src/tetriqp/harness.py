"""Monte Carlo orchestration: logical error rates, threshold scans,
end-to-end total-variation experiments, and the overhead calculator.

Every trial derives its own random streams from (seed, trial, tag), so
results are bit-identical for a fixed seed no matter how trials are chunked
across workers. The failure event is a decoded logical bit that differs from
the common-random-numbers noiseless reference of the same trial.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gf2
from .colex import build_tetrahedral_colex
from .decoder import get_block_decoder, get_facet_decoder, merge_facet_codes
from .iqp import (
    Distribution,
    IqpCircuit,
    exact_distribution,
    empirical_tv,
    sample_circuit,
)
from .noise import NoiseModel, propagate, sample_iid_faults, stage_layout, twirl_mask
from .rng import make_rng
from .surgery import Block, TetrahelixCode, build_tetrahelix


def wilson_interval(failures: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = failures / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 4  # logical qubits (IQP width)
    delta: float = 0.05  # target TV precision
    epsilon: float = 0.01
    gamma: float = 1.0
    trials: int = 1000
    seed: int = 0
    workers: int = 1
    L: int = 3
    k: int = 1
    max_l: int = 7
    max_k: int = 8
    max_statevector: int = 20
    c_k: float = 1.0
    c_l: float = 1.0
    c_r: float = 1.0
    eps_th: float | None = None
    mix_x: float = 0.25
    mix_z: float = 0.25
    mix_y: float = 0.25
    mix_meas: float = 0.25
    Ls: tuple = (3, 5)
    ks: tuple = (1,)
    epsilons: tuple = (0.004, 0.01, 0.02, 0.05, 0.1, 0.2)

    def noise_model(self, epsilon=None) -> NoiseModel:
        return NoiseModel(
            self.epsilon if epsilon is None else epsilon,
            self.mix_x,
            self.mix_z,
            self.mix_y,
            self.mix_meas,
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        d = json.loads(Path(path).read_text())
        for key in ("Ls", "ks", "epsilons"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


# ---------------------------------------------------------------------------
# Per-chain trial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    failed: bool  # decoded logical differs from the reference
    sector_flips: tuple[int, ...]  # per merge: residual logical misalignment
    merge_noncorrectable: int  # count of wrong merge decodes (= sector flips)
    prep_noncorrectable: int  # blocks whose residual acts as the X logical
    n_faults: int

    @property
    def corrupted(self) -> bool:
        return self.failed or any(self.sector_flips) or self.prep_noncorrectable > 0


class ChainSim:
    """Reusable simulator for one (k, L) chain."""

    def __init__(self, t: TetrahelixCode):
        self.t = t
        self.layout = stage_layout(t)
        self.block_decoders = [get_block_decoder(b) for b in t.blocks]
        self.facet_codes = merge_facet_codes(t)
        self.facet_decoders = [get_facet_decoder(fc) for fc in self.facet_codes]
        self.kernel = gf2.kernel_basis(t.code.hx.rows, t.code.n)
        self.pair_left = [
            [vl for vl, _ in pr.pairs] for pr in t.pairings
        ]
        self.pair_right = [
            [vr for _, vr in pr.pairs] for pr in t.pairings
        ]

    @classmethod
    def build(cls, k: int, L: int) -> "ChainSim":
        return cls(build_tetrahelix(k, L))

    def sample_reference(self, rng) -> int:
        bits = rng.integers(0, 2, len(self.kernel))
        o = 0
        for take, v in zip(bits, self.kernel):
            if take:
                o ^= v
        return o

    def run_trial(self, model: NoiseModel, seed: int, trial: int) -> TrialResult:
        t = self.t
        faults = sample_iid_faults(model, self.layout, (seed, trial, 0))
        prop = propagate(faults, t)

        x_diff = prop.layer_x
        prep_nc = 0
        residuals = []
        for b in range(t.k):
            dec = self.block_decoders[b]
            e_d = prop.prep_data_x.get(b, 0)
            e_m = prop.prep_meas.get(b, 0)
            syndrome = dec.face_syndrome(e_d) ^ e_m if (e_d or e_m) else 0
            xhat, _ = dec.decode_prep(syndrome)
            r = e_d ^ xhat
            residuals.append(r)
            x_diff ^= r << t.block_offset(b)
            if (r & dec.lz).bit_count() & 1:
                prep_nc += 1

        sector = []
        for j, pr in enumerate(t.pairings):
            flips = prop.pair_flips.get(j, 0)
            word = flips
            for p, (vl, vr) in enumerate(pr.pairs):
                bit = (residuals[j] >> vl & 1) ^ (residuals[j + 1] >> vr & 1)
                word ^= bit << p
            if word or flips:
                xhat, _ = self.facet_decoders[j].decode(word)
                xtrue, _ = self.facet_decoders[j].decode(word ^ flips)
            else:
                xhat = xtrue = 0
            if xhat:
                x_diff ^= t.block_logical_x[j]
            sector.append(xhat ^ xtrue)

        flips = prop.outcome_flips
        if x_diff:
            flips ^= twirl_mask(x_diff, make_rng((seed, trial, 1)))

        o_ref = self.sample_reference(make_rng((seed, trial, 2)))
        b_ref = self._decode(o_ref)
        b_noisy = b_ref if flips == 0 else self._decode(o_ref ^ flips)
        return TrialResult(
            failed=b_noisy != b_ref,
            sector_flips=tuple(sector),
            merge_noncorrectable=sum(sector),
            prep_noncorrectable=prep_nc,
            n_faults=len(faults),
        )

    def _decode(self, outcomes: int) -> int:
        from .surgery import split_frame

        res = split_frame(self.t, outcomes)
        out = 0
        for b in range(self.t.k):
            dec = self.block_decoders[b]
            zhat = dec.decode_cells(res.block_syndromes[b])
            lxb = self.t.block_slice(self.t.block_logical_x[b], b)
            ob = res.block_outcomes[b]
            out ^= ((ob & lxb).bit_count() + (zhat & lxb).bit_count()) & 1
        return out


# ---------------------------------------------------------------------------
# Logical error rate and threshold scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateEstimate:
    L: int
    k: int
    epsilon: float
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float
    merge_noncorrectable: int = 0
    prep_noncorrectable: int = 0
    corrupted: int = 0


def _count_chunk(args) -> tuple[int, int, int, int]:
    L, k, model, seed, start, stop = args
    sim = ChainSim.build(k, L)
    fails = merge_nc = prep_nc = corrupt = 0
    for trial in range(start, stop):
        res = sim.run_trial(model, seed, trial)
        fails += res.failed
        merge_nc += res.merge_noncorrectable
        prep_nc += res.prep_noncorrectable
        corrupt += res.corrupted
    return fails, merge_nc, prep_nc, corrupt


def logical_error_rate(
    L: int,
    k: int,
    model: NoiseModel,
    trials: int,
    seed: int,
    workers: int = 1,
    max_l: int = 7,
    max_k: int = 8,
    trace_path=None,
) -> RateEstimate:
    """Monte Carlo estimate of P[decoded logical != noiseless reference].

    trace_path, when given (single-worker runs), writes one JSON line per
    trial with the fault count, per-merge sector flips, and the outcome.
    """
    if L > max_l or k > max_k:
        raise ValueError(f"(L={L}, k={k}) exceeds caps (max_l={max_l}, max_k={max_k})")
    if trace_path is not None:
        from .decoder import write_trace

        sim = ChainSim.build(k, L)
        records = []
        fails = merge_nc = prep_nc = corrupt = 0
        for trial in range(trials):
            res = sim.run_trial(model, seed, trial)
            fails += res.failed
            merge_nc += res.merge_noncorrectable
            prep_nc += res.prep_noncorrectable
            corrupt += res.corrupted
            records.append(
                {
                    "trial": trial,
                    "n_faults": res.n_faults,
                    "sector_flips": list(res.sector_flips),
                    "prep_noncorrectable": res.prep_noncorrectable,
                    "failed": res.failed,
                }
            )
        write_trace(trace_path, records)
        counts = (fails, merge_nc, prep_nc, corrupt)
    elif workers <= 1 or trials < 2 * workers:
        counts = _count_chunk((L, k, model, seed, 0, trials))
    else:
        bounds = np.linspace(0, trials, workers + 1, dtype=int)
        jobs = [
            (L, k, model, seed, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_chunk, jobs))
        counts = tuple(sum(col) for col in zip(*parts))
    fails, merge_nc, prep_nc, corrupt = counts
    lo, hi = wilson_interval(fails, trials)
    return RateEstimate(
        L, k, model.epsilon, trials, fails, fails / trials, lo, hi,
        merge_noncorrectable=merge_nc,
        prep_noncorrectable=prep_nc,
        corrupted=corrupt,
    )


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[RateEstimate, ...]
    crossing: dict | None  # {'k', 'L_low', 'L_high', 'eps_low', 'eps_high', 'estimate'}

    def to_csv(self, path) -> None:
        lines = ["L,k,epsilon,trials,failures,rate,ci_low,ci_high"]
        for r in self.rows:
            lines.append(
                f"{r.L},{r.k},{r.epsilon:.10g},{r.trials},{r.failures},"
                f"{r.rate:.10g},{r.ci_low:.10g},{r.ci_high:.10g}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def threshold_scan(
    Ls, ks, epsilons, trials: int, seed: int, workers: int = 1
) -> ScanResult:
    """Grid Monte Carlo; reports the empirical crossing of the smallest and
    largest L curves as the threshold estimate."""
    if not Ls or not ks or not epsilons:
        raise ValueError("grids must be nonempty")
    rows = []
    by_key = {}
    for k in ks:
        for L in Ls:
            for idx_e, eps in enumerate(epsilons):
                sub_seed = seed + 7919 * (idx_e + 1000 * (L + 100 * k))
                est = logical_error_rate(
                    L, k, NoiseModel(eps), trials, sub_seed, workers=workers
                )
                rows.append(est)
                by_key[(k, L, eps)] = est
    crossing = None
    if len(Ls) >= 2:
        lo_L, hi_L = min(Ls), max(Ls)
        k = ks[0]
        diffs = [
            (eps, by_key[(k, lo_L, eps)].rate - by_key[(k, hi_L, eps)].rate)
            for eps in sorted(epsilons)
        ]
        for (e1, d1), (e2, d2) in zip(diffs, diffs[1:]):
            if d1 > 0 >= d2 or d1 >= 0 > d2:
                crossing = {
                    "k": k,
                    "L_low": lo_L,
                    "L_high": hi_L,
                    "eps_low": e1,
                    "eps_high": e2,
                    "estimate": math.sqrt(e1 * e2),
                }
                break
    return ScanResult(tuple(rows), crossing)


# ---------------------------------------------------------------------------
# End-to-end TV experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EndToEndResult:
    n: int
    epsilon: float
    trials: int
    tv: float
    ci_low: float
    ci_high: float
    eps_bar: float  # measured per-logical-qubit corruption probability
    bound_constant: float | None  # tv / (n * eps_bar)
    circuit: IqpCircuit
    depth: int


def _effective_circuit(base: IqpCircuit, assign: dict, alignments) -> IqpCircuit:
    """Gate exponents after sector misalignments flip block logicals.

    A misaligned block applies T^-e (up to phase); a controlled-phase across
    one misaligned side turns into CS^-e with an S^e byproduct on the other.
    """
    t = list(base.t_exponents)
    cs = []
    for q, e in enumerate(base.t_exponents):
        if e and alignments[q][assign[("t", q)] - 1]:
            t[q] = (-e) % 8
    for i, j, e in base.cs_exponents:
        step = assign[("cs", i, j)] - 1
        ai, aj = alignments[i][step], alignments[j][step]
        if ai and aj:
            t[i] = (t[i] - 2 * e) % 8
            t[j] = (t[j] - 2 * e) % 8
            cs.append((i, j, e))
        elif ai:
            t[j] = (t[j] + 2 * e) % 8
            cs.append((i, j, (-e) % 4))
        elif aj:
            t[i] = (t[i] + 2 * e) % 8
            cs.append((i, j, (-e) % 4))
        else:
            cs.append((i, j, e))
    return IqpCircuit(base.n, tuple(t), tuple(cs))


def end_to_end(config: ExperimentConfig) -> EndToEndResult:
    """Sample the noisy encoded pipeline and estimate TV against ideal p_D.

    Per trial, every logical qubit runs one chain (prepare, merge, ideal
    diagonal layer with injected faults, measure, decode). Sector errors from
    wrong merge fixes rotate the effective logical circuit; decode errors
    flip sampled bits.
    """
    from .iqp import schedule_depth

    n = config.n
    if n > config.max_statevector:
        raise ValueError(f"n={n} exceeds statevector cap {config.max_statevector}")
    circuit = sample_circuit(n, config.gamma, config.seed)
    depth, assign = schedule_depth(circuit)
    k = max(depth, 1)
    if k > config.max_k:
        raise ValueError(f"sampled circuit depth {k} exceeds the chain cap {config.max_k}")
    ideal = exact_distribution(circuit)
    sim = ChainSim.build(k, config.L)
    model = config.noise_model()

    eff_cache: dict[tuple, Distribution] = {}
    samples = []
    corrupted_chains = 0
    rng_sample = make_rng((config.seed, 0xE2E))
    for trial in range(config.trials):
        flips = 0
        alignments = []
        for q in range(n):
            res = sim.run_trial(model, config.seed + 1 + q, trial)
            if res.failed:
                flips |= 1 << q
            align = []
            acc = 0
            for b in range(k):
                align.append(acc)
                if b < len(res.sector_flips):
                    acc ^= res.sector_flips[b]
            alignments.append(align)
            if res.corrupted:
                corrupted_chains += 1
        key = tuple(tuple(a) for a in alignments)
        if any(any(a) for a in alignments):
            if key not in eff_cache:
                eff = _effective_circuit(circuit, assign, alignments)
                eff_cache[key] = exact_distribution(eff)
            dist = eff_cache[key]
        else:
            dist = ideal
        s = int(rng_sample.choice(1 << n, p=dist.probs))
        samples.append(s ^ flips)

    tv, lo, hi = empirical_tv(samples, ideal, seed=(config.seed, 0xB007))
    eps_bar = corrupted_chains / (config.trials * n)
    const = tv / (n * eps_bar) if eps_bar > 0 else None
    return EndToEndResult(
        n, config.epsilon, config.trials, tv, lo, hi, eps_bar, const, circuit, k
    )


# ---------------------------------------------------------------------------
# Overhead calculator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverheadPlan:
    n_logical: int
    delta: float
    epsilon: float
    eps_th: float
    k: int
    L: int
    block_qubits: int
    total_qubits: int
    extrapolated: bool


def _block_size_fit() -> tuple[float, float]:
    """Least-squares a*L^3 + b fit of built colex sizes (cached)."""
    global _FIT
    if _FIT is None:
        Ls = np.array([3.0, 5.0, 7.0])
        ns = np.array([float(build_tetrahedral_colex(int(l)).n) for l in Ls])
        A = np.stack([Ls**3, np.ones_like(Ls)], axis=1)
        coef, *_ = np.linalg.lstsq(A, ns, rcond=None)
        _FIT = (float(coef[0]), float(coef[1]))
    return _FIT


_FIT = None


def overhead(
    n_logical: int,
    delta: float,
    epsilon: float,
    eps_th: float,
    c_k: float = 1.0,
    c_l: float = 1.0,
    c_r: float = 1.0,
    max_l: int = 9,
) -> OverheadPlan:
    """Parameter plan: k = ceil(c_k log2 N), L from the precision relation,
    with k = O(L) enforced; block size built exactly when possible."""
    if epsilon >= eps_th:
        raise ValueError(f"epsilon {epsilon} must be below the threshold {eps_th}")
    if not 0 < delta <= 1:
        raise ValueError("delta must be in (0, 1]")
    k = max(1, math.ceil(c_k * math.log2(n_logical)))
    l_precision = math.ceil(c_l * math.log(n_logical / delta) / math.log(eps_th / epsilon))
    L = max(math.ceil(k / c_r), l_precision)
    buildable = L >= 3 and L % 2 == 1 and L <= max_l
    if buildable:
        m = build_tetrahedral_colex(L).n
        extrapolated = False
    else:
        a, b = _block_size_fit()
        m = int(round(a * L**3 + b))
        extrapolated = True
    return OverheadPlan(
        n_logical, delta, epsilon, eps_th, k, L, k * m, n_logical * k * m, extrapolated
    )


# ---------------------------------------------------------------------------
# Preparation-only Monte Carlo (rates of the noncorrectable channels)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrepScanRow:
    L: int
    epsilon: float
    trials: int
    tetra_noncorrectable: int
    merge_noncorrectable: int
    tetra_rate: float
    merge_rate: float
    tetra_ci: tuple[float, float]
    merge_ci: tuple[float, float]


def prep_scan(L: int, model: NoiseModel, trials: int, seed: int) -> PrepScanRow:
    """Estimate the noncorrectable preparation and merge rates empirically."""
    from .decoder import merge_measure, prepare_plus_single_shot

    block = Block.build(build_tetrahedral_colex(L))
    t2 = build_tetrahelix(2, L, block=block)
    fc = merge_facet_codes(t2)[0]
    tetra_nc = merge_nc = 0
    for trial in range(trials):
        left = prepare_plus_single_shot(block, model, (seed, trial, 10))
        right = prepare_plus_single_shot(block, model, (seed, trial, 11))
        tetra_nc += left.report.tetra_noncorrectable
        tetra_nc += right.report.tetra_noncorrectable
        out = merge_measure(
            left, right, t2.pairings[0], fc, block, model, (seed, trial, 12)
        )
        merge_nc += out.merge_noncorrectable
    t_lo, t_hi = wilson_interval(tetra_nc, 2 * trials)
    m_lo, m_hi = wilson_interval(merge_nc, trials)
    return PrepScanRow(
        L, model.epsilon, trials, tetra_nc, merge_nc,
        tetra_nc / (2 * trials), merge_nc / trials, (t_lo, t_hi), (m_lo, m_hi),
    )


def write_tv_csv(path, results: list[EndToEndResult]) -> None:
    lines = ["N,epsilon,trials,tv,ci_low,ci_high,bound"]
    for r in results:
        bound = "" if r.bound_constant is None else f"{r.bound_constant:.10g}"
        lines.append(
            f"{r.n},{r.epsilon:.10g},{r.trials},{r.tv:.10g},"
            f"{r.ci_low:.10g},{r.ci_high:.10g},{bound}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
