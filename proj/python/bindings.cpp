#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hfl/benchgen.hpp"
#include "hfl/concolic.hpp"
#include "hfl/coordinator.hpp"
#include "hfl/icfg.hpp"
#include "hfl/stats.hpp"

namespace py = pybind11;
using namespace hfl;

namespace {

std::vector<uint8_t> toBytes(const py::bytes &b) {
  std::string s = b;
  return std::vector<uint8_t>(s.begin(), s.end());
}

py::bytes fromBytes(const std::vector<uint8_t> &v) {
  return py::bytes(reinterpret_cast<const char *>(v.data()), v.size());
}

py::dict traceDict(const Program &p, const LabelSet &ls, const ExecTrace &t) {
  py::dict d;
  py::list seq;
  for (NodeId n : t.blockSeq) seq.append(p.nodeName(n));
  d["block_seq"] = seq;
  d["instr_count"] = t.instrCount;
  d["ret"] = t.retCode;
  d["stop"] = t.stop == StopReason::Returned ? "returned"
              : t.stop == StopReason::BudgetExhausted ? "budget-exhausted"
                                                      : "call-depth-exceeded";
  d["labels_reached"] = t.labelsReached;
  py::list viols;
  for (auto &v : t.violations) {
    py::dict vd;
    vd["label"] = v.label;
    vd["family"] = familyName(ls.labels[v.label - 1].family);
    vd["operands"] = v.operands;
    viols.append(vd);
  }
  d["violations"] = viols;
  return d;
}

struct AnalyzedProgram {
  Program program;
  LabelSet placed;
  LabelSet labels;
  TrimReport trim;
  InterCfg cfg;
  ReachTable reach;
};

AnalyzedProgram analyze(const std::string &text) {
  AnalyzedProgram a;
  a.program = parseProgram(text);
  a.placed = placeLabels(a.program);
  auto [trimmed, report] = trimLabels(a.program, a.placed);
  a.labels = trimmed;
  a.trim = report;
  a.cfg = buildInterCfg(a.program);
  a.reach = computeReach(a.cfg, a.labels);
  return a;
}

CampaignConfig configFromKwargs(const py::kwargs &kw) {
  CampaignConfig cc;
  if (kw.contains("policy")) {
    auto pol = policyFromName(kw["policy"].cast<std::string>());
    if (!pol) throw Error("unknown policy");
    cc.policy = *pol;
  }
  if (kw.contains("rounds")) cc.rounds = kw["rounds"].cast<int>();
  if (kw.contains("rng")) cc.rngSeed = kw["rng"].cast<uint64_t>();
  if (kw.contains("fuzz_execs"))
    cc.fuzzExecsPerRound = kw["fuzz_execs"].cast<uint64_t>();
  if (kw.contains("concolic_seeds"))
    cc.concolicSeedsPerRound = kw["concolic_seeds"].cast<int>();
  if (kw.contains("tau")) cc.tau = kw["tau"].cast<uint64_t>();
  if (kw.contains("decay")) cc.decay = kw["decay"].cast<double>();
  if (kw.contains("concolic")) cc.concolicEnabled = kw["concolic"].cast<bool>();
  if (kw.contains("stop_on_planted"))
    cc.stopOnAllPlanted = kw["stop_on_planted"].cast<bool>();
  if (kw.contains("planted_ids"))
    cc.plantedIds = kw["planted_ids"].cast<std::vector<LabelId>>();
  if (kw.contains("workers")) cc.workers = kw["workers"].cast<int>();
  if (kw.contains("deterministic"))
    cc.deterministic = kw["deterministic"].cast<bool>();
  if (kw.contains("initial_seeds"))
    for (auto item : kw["initial_seeds"])
      cc.initialSeeds.push_back(toBytes(item.cast<py::bytes>()));
  return cc;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hybrid fuzzing laboratory: mini-IR interpreter, bug labeling, "
            "reachability, fuzz/concolic campaigns and benchmark generation";

  // Base first: translators run newest-first, so the derived classes
  // registered below take precedence.
  py::register_exception<Error>(m, "HflError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "IrParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "IrValidationError",
                                          PyExc_ValueError);

  py::class_<Program>(m, "Program")
      .def_property_readonly("entry", [](const Program &p) { return p.entry; })
      .def_property_readonly("input_len",
                             [](const Program &p) { return p.inputLen; })
      .def_property_readonly(
          "function_names",
          [](const Program &p) {
            std::vector<std::string> names;
            for (auto &f : p.functions) names.push_back(f.name);
            return names;
          })
      .def("__repr__", [](const Program &p) {
        return "<Program functions=" + std::to_string(p.functions.size()) +
               " input_len=" + std::to_string(p.inputLen) + ">";
      });

  m.def("parse_program", &parseProgram, py::arg("text"),
        "Parse and validate IR text.");
  m.def("print_program", &printProgram, py::arg("program"),
        "Render a program back to canonical text.");
  m.def("bucket_of", &bucketOf, py::arg("hits"),
        "AFL-style hit-count bucket index (0..7).");
  m.def(
      "score_from_terms",
      [](const std::vector<std::pair<int, uint32_t>> &terms, double decay) {
        return scoreFromTerms(terms, decay);
      },
      py::arg("terms"), py::arg("decay") = 0.05,
      "Mean of exp(-decay*attempts) * potential over (L, S) terms.");

  m.def(
      "labels",
      [](const std::string &text, bool trimmed) {
        AnalyzedProgram a = analyze(text);
        const LabelSet &ls = trimmed ? a.labels : a.placed;
        py::list out;
        for (auto &l : ls.labels) {
          py::dict d;
          d["id"] = l.id;
          d["family"] = familyName(l.family);
          d["function"] = a.program.functions[l.fn].name;
          d["block"] = a.program.functions[l.fn].blocks[l.block].label;
          d["instr"] = l.instr;
          d["live"] = l.live;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("trimmed") = true,
      "Bug labels for an IR program, optionally after static trimming.");

  m.def(
      "reach_counts",
      [](const std::string &text) {
        AnalyzedProgram a = analyze(text);
        py::dict out;
        for (NodeId n = 0; n < a.program.numNodes; ++n)
          out[py::str(a.program.nodeName(n))] = a.reach.reachCount(n);
        return out;
      },
      py::arg("text"),
      "Per-block count of live labels reachable via at least one edge.");

  m.def(
      "run_concrete",
      [](const std::string &text, const py::bytes &input, uint64_t budget) {
        AnalyzedProgram a = analyze(text);
        RunLimits lim;
        lim.instrBudget = budget;
        auto t = runConcrete(a.program, a.labels, toBytes(input), lim);
        return traceDict(a.program, a.labels, t);
      },
      py::arg("text"), py::arg("input"), py::arg("budget") = 1000000,
      "Execute one input; returns the trace with violations.");

  m.def(
      "run_concolic",
      [](const std::string &text, const py::bytes &seedBytes,
         uint64_t timeoutUnits, uint64_t rngSeed) {
        AnalyzedProgram a = analyze(text);
        Seed s;
        s.id = 1;
        s.bytes = toBytes(seedBytes);
        s.bytes.resize(a.program.inputLen, 0);
        auto t = runConcrete(a.program, a.labels, s.bytes);
        attachTraceInfo(a.program, t, s);
        CoverageMap cov;
        cov.observe(t);
        ConcolicEngine eng(a.program, a.labels);
        Rng rng(rngSeed);
        auto res = eng.run(s, cov, {}, timeoutUnits, rng);
        py::dict d;
        py::list tcs;
        for (auto &tc : res.testCases) {
          py::dict td;
          td["kind"] = tc.kind == TestCaseOut::Kind::BranchFlip ? "flip"
                       : tc.kind == TestCaseOut::Kind::VerifyWitness
                           ? "verify"
                           : "optimistic";
          td["bytes"] = fromBytes(tc.bytes);
          if (tc.kind == TestCaseOut::Kind::BranchFlip)
            td["site"] = a.program.nodeName(tc.site);
          else
            td["label"] = tc.label;
          tcs.append(td);
        }
        d["test_cases"] = tcs;
        py::list vers;
        for (auto &v : res.verifications) {
          py::dict vd;
          vd["label"] = v.labelId;
          vd["mode"] =
              v.mode == VerificationOutcome::Mode::Full ? "full" : "optimistic";
          vd["status"] = solveStatusName(v.status);
          vers.append(vd);
        }
        d["verifications"] = vers;
        d["attempted_branches"] = res.attempted.size();
        d["budget_exhausted"] = res.budgetExhausted;
        return d;
      },
      py::arg("text"), py::arg("seed"), py::arg("timeout_units") = 100000,
      py::arg("rng") = 1,
      "Replay one seed symbolically: branch flips plus bug-guided "
      "verification against an empty prior coverage map.");

  m.def(
      "generate_bench",
      [](uint64_t rngSeed, uint32_t inputLen, int plants, int densitySkew,
         int branchDepth, double indirectFrac) {
        BenchSpec spec;
        spec.rngSeed = rngSeed;
        spec.inputLen = inputLen;
        spec.densitySkew = densitySkew;
        spec.branchDepth = branchDepth;
        spec.indirectCallFraction = indirectFrac;
        for (int i = 0; i < plants; ++i) {
          PlantSpec ps;
          ps.inputTriggered = i != 0;
          ps.family = i == 0 ? Family::UnsignedOverflow
                             : static_cast<Family>((i - 1) % 4);
          spec.plants.push_back(ps);
        }
        GeneratedBench gb = generate(spec);
        py::dict d;
        d["ir_text"] = gb.irText;
        d["manifest_csv"] = gb.manifestCsv();
        py::list ps;
        for (auto &pl : gb.plants) {
          py::dict pd;
          pd["label_id"] = pl.labelId;
          pd["family"] = familyName(pl.family);
          pd["guard_offset"] = pl.guardOffset;
          pd["magic"] = pl.magic;
          pd["ground_truth"] = fromBytes(pl.groundTruthInput);
          pd["reach_input"] = fromBytes(pl.reachInput);
          ps.append(pd);
        }
        d["plants"] = ps;
        return d;
      },
      py::arg("rng") = 1, py::arg("input_len") = 64, py::arg("plants") = 2,
      py::arg("density_skew") = 10, py::arg("branch_depth") = 6,
      py::arg("indirect_frac") = 0.0,
      "Generate a two-handler benchmark with planted ground-truth bugs.");

  m.def(
      "plant_infeasible",
      [](uint32_t inputLen, bool survivesTrim) {
        BenchSpec spec;
        spec.inputLen = inputLen;
        GeneratedBench gb = plantInfeasible(spec, survivesTrim);
        py::dict d;
        d["ir_text"] = gb.irText;
        d["label_id"] = gb.plants[0].labelId;
        return d;
      },
      py::arg("input_len") = 1, py::arg("survives_trim") = true,
      "A program with one certified-untriggerable label.");

  m.def(
      "run_campaign",
      [](const std::string &text, const py::kwargs &kw) {
        AnalyzedProgram a = analyze(text);
        CampaignConfig cc = configFromKwargs(kw);
        Campaign camp(a.program, a.labels, a.reach, cc);
        auto result = camp.run();
        py::dict d;
        py::list rounds;
        for (auto &rs : result.rounds) {
          py::dict rd;
          rd["round"] = rs.round;
          rd["edges"] = rs.edges;
          rd["pairs"] = rs.pairs;
          rd["labels_reached"] = rs.labelsReached;
          rd["labels_triggered"] = rs.labelsTriggered;
          rd["planted_triggered"] = rs.plantedTriggered;
          rd["policy"] = rs.policy;
          rd["scheduled"] = rs.scheduled;
          rd["json"] = rs.toJsonLine();
          rounds.append(rd);
        }
        d["rounds"] = rounds;
        py::list bugs;
        for (auto &b : result.bugs) {
          py::dict bd;
          bd["label"] = b.label;
          bd["family"] = familyName(b.family);
          bd["first_round"] = b.firstRound;
          bd["witness"] = fromBytes(b.witness);
          bugs.append(bd);
        }
        d["bugs"] = bugs;
        d["total_execs"] = result.totalExecs;
        return d;
      },
      py::arg("text"),
      "Run a fuzz + concolic campaign; keyword arguments mirror the CLI "
      "(policy, rounds, rng, fuzz_execs, concolic_seeds, tau, decay, "
      "concolic, stop_on_planted, planted_ids, initial_seeds, workers).");

  m.def(
      "mann_whitney",
      [](const std::vector<double> &a, const std::vector<double> &b) {
        auto r = mannWhitneyOneSided(a, b);
        return py::make_tuple(r.u, r.pOneSided);
      },
      py::arg("a"), py::arg("b"),
      "One-sided exact Mann-Whitney U test that `a` tends smaller than `b`; "
      "returns (U, p).");

  m.def("family_names", []() {
    return std::vector<std::string>{
        familyName(Family::OOB), familyName(Family::OversizedShift),
        familyName(Family::SignedOverflow), familyName(Family::UnsignedOverflow)};
  });
}
