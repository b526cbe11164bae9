"""Run orchestration and reports.

A report is plain JSON-able data. Every aggregate is a pure function of the
per-probe records, and :func:`emit_report` recomputes them before writing
anything. The ``created`` timestamp is the only field outside the content
hash.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .classifier import check_classifier_axioms
from .errors import AxiomViolationError, PreconditionError, ReportIntegrityError
from .oracle import FiniteScenario, oracle_stability_table
from .precision import estimate_machine_epsilon, representability_floor
from .scenario import Scenario, canonical_json
from .series import test_stability_via_series
from .sets import is_dense_at_resolution
from .stability import (INCONCLUSIVE, STABLE, UNSTABLE, Verdict, agreement_category, dense_blocker_scan,
                        exit_margin, test_accumulation_point, test_stable_point)

__all__ = ["Report", "run_scenario", "emit_report", "load_report", "content_hash", "compute_aggregates",
           "REPORT_SCHEMA", "FORMATS"]

REPORT_SCHEMA = "domstab.report/1"
FORMATS = ("json", "csv-summary")
OUTCOMES = (STABLE, UNSTABLE, INCONCLUSIVE)


@dataclass(eq=False)
class Report:
    data: dict

    def content(self):
        return {k: v for k, v in self.data.items() if k != "created"}

    @property
    def content_hash(self):
        return content_hash(self)

    @property
    def records(self):
        return self.data.get("records", [])

    @property
    def aggregates(self):
        return self.data.get("aggregates", {})

    @property
    def status(self):
        return self.data.get("status")

    def __eq__(self, other):
        return isinstance(other, Report) and canonical_json(self.data) == canonical_json(other.data)


def content_hash(r: Report) -> str:
    return hashlib.sha256(canonical_json(r.content()).encode()).hexdigest()


def _pt(p):
    return [float(v) for v in p]


# ---------------------------------------------------------------------------
def compute_aggregates(records, set_ids):
    """Counts and agreement rates, recomputed from the records alone."""
    per_set = {}
    for sid in set_ids:
        per_set[str(sid)] = {
            "stability": dict.fromkeys(OUTCOMES, 0),
            "series": dict.fromkeys(OUTCOMES, 0),
            "oracle": {"stable": 0, "unstable": 0},
            "accumulation": {"true": 0, "false": 0, "undecided": 0},
        }
    undefined = 0
    pairs = {"cross_check": [0, 0], "series_vs_stability": [0, 0], "oracle_vs_stability": [0, 0]}
    skipped = 0
    blocker_ok = True
    for rec in records:
        if rec["set"] is None:
            undefined += 1
            continue
        bucket = per_set[str(rec["set"])]
        st, se, orc, acc = rec.get("stability"), rec.get("series"), rec.get("oracle"), rec.get("accumulation")
        if st is not None:
            bucket["stability"][st["outcome"]] += 1
        if se is not None:
            bucket["series"][se["outcome"]] += 1
        if orc is not None:
            bucket["oracle"]["stable" if orc["stable"] else "unstable"] += 1
        if acc is not None:
            key = {True: "true", False: "false", None: "undecided"}[acc["accumulates"]]
            bucket["accumulation"][key] += 1
        cc = rec.get("cross_check")
        if cc is not None:
            if cc.get("skipped"):
                skipped += 1
            else:
                pairs["cross_check"][0] += 1
                pairs["cross_check"][1] += int(cc["agree"])
        if st is not None and se is not None:
            pairs["series_vs_stability"][0] += 1
            pairs["series_vs_stability"][1] += int(st["outcome"] == se["outcome"])
        if st is not None and orc is not None:
            pairs["oracle_vs_stability"][0] += 1
            pairs["oracle_vs_stability"][1] += int((st["outcome"] == STABLE) == orc["stable"])
        if rec.get("blocker_violations"):
            blocker_ok = False
    agreement = {}
    for name, (total, agreed) in pairs.items():
        agreement[name] = {"total": total, "agreed": agreed, "rate": None if total == 0 else agreed / total}
    agreement["cross_check"]["skipped"] = skipped
    return {"per_set": per_set, "probes": len(records), "undefined_probes": undefined,
            "agreement": agreement, "blocker_consistent": blocker_ok}


# ---------------------------------------------------------------------------
def _probe_record(sc: Scenario, c, k, p, idx, want, oracle_table, support_pos):
    i = int(idx)
    rec = {"index": k, "point": _pt(p), "set": None, "label": None}
    if i < 0:
        rec["reason"] = "point lies in no set" if i == -1 else "point lies in several sets"
        return rec, None
    cfg, metric = sc.config, sc.metric
    rec["set"] = c.sets[i].set_id
    rec["label"] = c.labels[i]
    verdict = None
    if "stability" in want or "cross-check" in want:
        verdict = test_stable_point(c, p, cfg, metric, probe_index=k)
        if "stability" in want:
            rec["stability"] = verdict.to_dict()
    acc = None
    if "accumulation" in want or ("cross-check" in want and i == sc.cross_check_target):
        acc = test_accumulation_point(c.sets[i], p, cfg, metric, probe_index=k, space=c.ambient)
        if "accumulation" in want:
            rec["accumulation"] = acc.to_dict()
    if "series" in want:
        gens = None if c.ambient.finite else sc.generators(k)
        rec["series"] = test_stability_via_series(c, p, gens, cfg, metric, probe_index=k,
                                                  eligible=sc.cross_check_eligible).to_dict()
    if "cross-check" in want and i == sc.cross_check_target:
        margin = None if c.ambient.finite else exit_margin(c.sets[i], p, metric)
        cat = agreement_category(verdict, acc, margin, representability_floor(p, cfg.k), cfg.lower_radius(p))
        if cat is None:
            rec["cross_check"] = {"skipped": True, "margin": margin}
        else:
            rec["cross_check"] = {"skipped": False, "stable_side": cat[0], "accumulation_side": cat[1],
                                  "agree": cat[0] == cat[1], "margin": margin}
    if oracle_table is not None:
        pos = support_pos(p)
        if pos is not None:
            stable, cert = oracle_table[pos]
            rec["oracle"] = {"stable": stable, "certified_delta": cert}
    return rec, verdict


def _calibration(sc: Scenario):
    e = sc.epsilon
    cal = estimate_machine_epsilon(e.get("epsilon_0", 1.0), e.get("variant", "halving"), sc.config.k)
    out = cal.to_dict()
    if e.get("variant", "halving") != "halving":
        out["halving"] = estimate_machine_epsilon(1.0, "halving", sc.config.k).to_dict()
    return out


def run_scenario(sc: Scenario, workers: int = 1) -> Report:
    """Execute the scenario's analyses.

    Raises :class:`AxiomViolationError` when an induced classifier breaks
    the classifier conditions. Violations by an external classifier only
    mark the verdicts untrusted.
    """
    want = set(sc.analyses)
    c = sc.classifier
    data = {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "seed": sc.seed,
        "scenario_digest": sc.digest,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "mode": sc.config.mode,
        "analyses": sorted(want),
        "calibration": _calibration(sc),
    }
    notes = []
    set_ids = [s.set_id for s in c.sets]
    if want - {"epsilon"}:
        axioms = check_classifier_axioms(c, sc.probes, require_coverage=sc.coverage_declared, metric=sc.metric)
        if "axioms" in want:
            data["axioms"] = axioms.to_dict()
        if not axioms.passed:
            if sc.induced:
                raise AxiomViolationError(axioms)
            c = c.with_trust(False)
            notes.append("external classifier violates the classifier conditions; verdicts are untrusted")
    if "cross-check" in want and not sc.cross_check_eligible:
        raise PreconditionError("cross-check requested but the scenario is not declared cross_check_eligible")

    oracle_table = None
    support_pos = None
    if "oracle" in want:
        if c.ambient.finite:
            fs = FiniteScenario.from_classifier(c, sc.metric, sc.config.rho)
            rho = sc.config.rho if sc.config.rho is not None else representability_floor(np.zeros(1), sc.config.k)
            oracle_table = oracle_stability_table(fs, sc.config.mode, rho)
            support_pos = c.ambient.support_index
        else:
            notes.append("oracle skipped: the space has no finite support")

    per_probe = want & {"stability", "accumulation", "series", "cross-check"} or oracle_table is not None
    records = []
    verdicts = []
    if per_probe:
        idx = c.set_indices(sc.probes)
        jobs = list(enumerate(sc.probes))

        def work(job):
            k, p = job
            return _probe_record(sc, c, k, p, idx[k], want, oracle_table, support_pos)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(work, jobs))
        else:
            results = [work(j) for j in jobs]
        results.sort(key=lambda r: r[0]["index"])
        records = [r for r, _ in results]
        verdicts = [v for _, v in results]

    if "density" in want:
        if "stability" in want and sc.coverage_declared:
            blocker = dense_blocker_scan(c, sc.probes, sc.resolutions, sc.config, sc.metric, verdicts)
            data["density"] = [d.to_dict() for d in blocker.density]
            data["blocker"] = {"checks": blocker.checks, "violations": len(blocker.violations)}
            for v in blocker.violations:
                records[v[0]].setdefault("blocker_violations", []).append(
                    {"dense_set": v[3], "resolution": v[4], "certified_delta": v[5]})
        else:
            dens = []
            for s in c.sets:
                for r in sc.resolutions:
                    dv = is_dense_at_resolution(s, sc.probes, r, sc.metric, sc.config)
                    dens.append(dv.to_dict() | {"set": s.set_id})
            data["density"] = dens
            if not sc.coverage_declared:
                notes.append("blocker scan skipped: coverage of the space by the sets is not declared")

    data["records"] = records
    data["aggregates"] = compute_aggregates(records, set_ids) if per_probe else {}
    data["trusted"] = c.trusted
    data["notes"] = notes
    blocker_ok = data["aggregates"].get("blocker_consistent", True)
    data["status"] = "ok" if blocker_ok else "failed"
    return Report(data)


# ---------------------------------------------------------------------------
def _audit(r: Report):
    if not r.records and not r.aggregates:
        return
    set_ids = list(r.aggregates["per_set"].keys())
    again = compute_aggregates(r.records, set_ids)
    if canonical_json(again) != canonical_json(r.aggregates):
        raise ReportIntegrityError("aggregates do not recompute from the per-probe records")


def _outcome(rec):
    for key in ("stability", "series"):
        if rec.get(key) is not None:
            v = rec[key]
            return v["outcome"], v["certified_delta"], v["clause"]
    if rec.get("oracle") is not None:
        o = rec["oracle"]
        return (STABLE if o["stable"] else UNSTABLE), o["certified_delta"], None
    return None, None, None


def emit_report(r: Report, fmt: str = "json", path=None) -> str:
    """Serialise ``r`` (after a self-audit) and optionally write it to ``path``."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    _audit(r)
    if fmt == "json":
        text = json.dumps(r.data, indent=1, sort_keys=True, allow_nan=False) + "\n"
    else:
        buf = io.StringIO()
        dim = len(r.records[0]["point"]) if r.records else 0
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index"] + [f"x{i}" for i in range(dim)] + ["set", "mode", "outcome", "certified_delta", "clause"])
        for rec in r.records:
            outcome, cert, clause = _outcome(rec)
            w.writerow([rec["index"]] + [repr(v) for v in rec["point"]] + [
                "" if rec["set"] is None else rec["set"], r.data["mode"], outcome or "",
                "" if cert is None else repr(cert), clause or ""])
        text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def load_report(source) -> Report:
    """Parse a JSON report from a path or from its text."""
    if isinstance(source, str) and source.lstrip().startswith("{"):
        return Report(json.loads(source))
    with open(source, encoding="utf-8") as fh:
        return Report(json.load(fh))
