#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hfl/benchgen.hpp"
#include "hfl/coordinator.hpp"
#include "hfl/icfg.hpp"

namespace fs = std::filesystem;
using namespace hfl;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Analysis {
  Program program;
  LabelSet placed;   // before trimming
  LabelSet labels;   // after trimming
  TrimReport trim;
  InterCfg cfg;
  ReachTable reach;
};

Analysis analyzeProgram(const std::string &path) {
  Analysis a;
  a.program = parseProgram(slurp(path));
  a.placed = placeLabels(a.program);
  auto [trimmed, report] = trimLabels(a.program, a.placed);
  a.labels = trimmed;
  a.trim = report;
  a.cfg = buildInterCfg(a.program);
  a.reach = computeReach(a.cfg, a.labels);
  return a;
}

void printLabels(const Analysis &a, std::ostream &os) {
  for (auto &l : a.labels.labels) {
    auto &f = a.program.functions[l.fn];
    os << l.id << " " << familyName(l.family) << " " << f.name << ":"
       << f.blocks[l.block].label << ":" << l.instr << " "
       << (l.live ? "live" : "trimmed");
    for (auto &ev : a.trim.trimmed)
      if (ev.id == l.id)
        os << " [parent=" << ev.parentBlock << " guard=" << ev.guard << "]";
    os << "\n";
  }
}

void printReach(const Analysis &a, std::ostream &os) {
  for (NodeId n = 0; n < a.program.numNodes; ++n)
    os << a.program.nodeName(n) << " " << a.reach.reachCount(n) << "\n";
}

std::vector<LabelId> plantedFromManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<LabelId> ids;
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ids.push_back(std::stoi(line.substr(0, line.find(','))));
  }
  return ids;
}


// Flat `key = value` campaign configuration; command-line flags win over
// file values. Keys use the long option names without the dashes.
void applyFlatConfig(const std::string &path, CLI::App &run,
                     std::string &policy, CampaignConfig &cc,
                     std::string &manifest, std::string &out,
                     std::vector<std::string> &seedFiles, bool &deterministic,
                     bool &noConcolic, bool &stopPlanted) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  auto given = [&](const std::string &name) {
    return run.count("--" + name) > 0;
  };
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto c = line.find(';'); c != std::string::npos) line.resize(c);
    if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (blank) continue;
      throw Error(path + ":" + std::to_string(lineNo) + ": expected key = value");
    }
    auto trim = [](std::string v) {
      size_t a = v.find_first_not_of(" \t\r");
      size_t b = v.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    auto asBool = [&]() { return val == "1" || val == "true" || val == "yes"; };
    if (key == "policy") { if (!given(key)) policy = val; }
    else if (key == "rounds") { if (!given(key)) cc.rounds = std::stoi(val); }
    else if (key == "rng") { if (!given(key)) cc.rngSeed = std::stoull(val); }
    else if (key == "workers") { if (!given(key)) cc.workers = std::stoi(val); }
    else if (key == "fuzz-execs") { if (!given(key)) cc.fuzzExecsPerRound = std::stoull(val); }
    else if (key == "concolic-seeds") { if (!given(key)) cc.concolicSeedsPerRound = std::stoi(val); }
    else if (key == "tau") { if (!given(key)) cc.tau = std::stoull(val); }
    else if (key == "decay") { if (!given(key)) cc.decay = std::stod(val); }
    else if (key == "candidates") { if (!given(key)) cc.candidatesPerSeed = std::stoi(val); }
    else if (key == "search-budget") { if (!given(key)) cc.solver.searchBudget = std::stoi(val); }
    else if (key == "exhaustive-cap") { if (!given(key)) cc.solver.exhaustiveByteCap = std::stoi(val); }
    else if (key == "deterministic") { if (!given(key)) deterministic = asBool(); }
    else if (key == "no-concolic") { if (!given(key)) noConcolic = asBool(); }
    else if (key == "stop-on-planted") { if (!given(key)) stopPlanted = asBool(); }
    else if (key == "manifest") { if (!given(key)) manifest = val; }
    else if (key == "out") { if (!given(key)) out = val; }
    else if (key == "seed-file") { if (!given(key)) seedFiles.push_back(val); }
    else throw Error(path + ":" + std::to_string(lineNo) + ": unknown key '" + key + "'");
  }
}

int cmdRun(const std::string &progPath, CampaignConfig cc,
           const std::vector<std::string> &seedFiles,
           const std::string &manifest, const std::string &outDir) {
  Analysis a = analyzeProgram(progPath);
  if (!manifest.empty()) cc.plantedIds = plantedFromManifest(manifest);
  for (auto &sf : seedFiles) cc.initialSeeds.push_back(readBytesFile(sf));

  std::optional<SeedStore> store;
  std::ofstream statsFile;
  if (!outDir.empty()) {
    fs::create_directories(outDir);
    const char *env = std::getenv("HFL_SEED_DIR");
    store.emplace(env ? fs::path(env) : fs::path(outDir) / "seeds");
    statsFile.open(fs::path(outDir) / "stats.jsonl", std::ios::trunc);
  }

  Campaign camp(a.program, a.labels, a.reach, cc);
  auto result = camp.run(
      [&](const RoundStats &rs) {
        std::cout << rs.toJsonLine() << "\n";
        if (statsFile.is_open()) statsFile << rs.toJsonLine() << "\n";
      },
      store ? &*store : nullptr);

  std::string csv = result.bugReportCsv();
  if (!outDir.empty()) {
    std::ofstream rep(fs::path(outDir) / "bugs.csv", std::ios::trunc);
    rep << csv;
  } else {
    std::cerr << csv;
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"hybrid fuzzing laboratory"};
  app.require_subcommand(1);

  // analyze
  auto *analyze = app.add_subcommand("analyze", "static analysis dumps");
  std::string aProg;
  bool aLabels = false, aReachFlag = false;
  analyze->add_option("program", aProg, "IR file")->required();
  analyze->add_flag("--labels", aLabels, "dump bug labels and trim evidence");
  analyze->add_flag("--reach", aReachFlag, "dump per-block reach counts");

  // gen
  auto *gen = app.add_subcommand("gen", "generate a benchmark program");
  std::string gOut = "bench";
  BenchSpec gSpec;
  int gPlants = 2;
  bool gInfeasible = false;
  uint64_t gRng = 1;
  gen->add_option("--out", gOut, "output directory");
  gen->add_option("--rng", gRng, "generator seed");
  gen->add_option("--input-len", gSpec.inputLen, "input length in bytes");
  gen->add_option("--functions", gSpec.fillerFunctions, "filler function count");
  gen->add_option("--blocks", gSpec.blocksPerFunction, "blocks per filler function");
  gen->add_option("--branch-depth", gSpec.branchDepth, "filler chain depth");
  gen->add_option("--indirect-frac", gSpec.indirectCallFraction,
                  "fraction of filler calls made indirect");
  gen->add_option("--dense-labels", gSpec.denseLabels, "labels in the dense handler");
  gen->add_option("--skew", gSpec.densitySkew, "dense:sparse label ratio");
  gen->add_option("--plants", gPlants, "planted bug count");
  gen->add_flag("--infeasible", gInfeasible,
                "emit a program with one untriggerable label instead");

  // replay
  auto *replay = app.add_subcommand("replay", "execute one input and dump the trace");
  std::string rProg, rSeed;
  uint64_t rBudget = 1'000'000;
  replay->add_option("program", rProg, "IR file")->required();
  replay->add_option("seed", rSeed, "input bytes file")->required();
  replay->add_option("--budget", rBudget, "instruction budget");

  // score
  auto *score = app.add_subcommand("score", "dump per-seed importance scores");
  std::string sProg, sSeeds;
  double sDecay = 0.05;
  score->add_option("program", sProg, "IR file")->required();
  score->add_option("--seeds", sSeeds, "directory of seed files")->required();
  score->add_option("--decay", sDecay, "attempt decay constant");

  // run
  auto *run = app.add_subcommand("run", "drive a fuzz + concolic campaign");
  std::string runProg, runPolicy = "savior", runManifest, runOut;
  std::vector<std::string> runSeeds;
  CampaignConfig cc;
  bool deterministic = false;
  run->add_option("program", runProg, "IR file")->required();
  run->add_option("--policy", runPolicy, "savior|random|smallest");
  run->add_option("--rounds", cc.rounds, "round limit");
  run->add_option("--rng", cc.rngSeed, "campaign rng seed");
  run->add_flag("--deterministic", deterministic, "single-threaded reproducible mode");
  run->add_option("--workers", cc.workers, "fuzz worker count");
  run->add_option("--fuzz-execs", cc.fuzzExecsPerRound, "mutation executions per round");
  run->add_option("--concolic-seeds", cc.concolicSeedsPerRound,
                  "seeds sent to the concolic executor per round");
  run->add_option("--tau", cc.tau, "base concolic timeout unit");
  run->add_option("--decay", cc.decay, "attempt decay constant");
  run->add_option("--candidates", cc.candidatesPerSeed, "candidates per queue seed");
  run->add_option("--search-budget", cc.solver.searchBudget, "solver search trials");
  run->add_option("--exhaustive-cap", cc.solver.exhaustiveByteCap,
                  "max bytes for exhaustive solving");
  bool noConcolic = false;
  run->add_flag("--no-concolic", noConcolic, "fuzzing only");
  bool stopPlanted = false;
  run->add_flag("--stop-on-planted", stopPlanted, "stop when all planted bugs trigger");
  run->add_option("--manifest", runManifest, "benchmark manifest for planted ids");
  run->add_option("--out", runOut, "output directory (stats, seeds, bug report)");
  run->add_option("--seed-file", runSeeds, "initial seed file(s)");
  std::string runConfig;
  run->add_option("--config", runConfig, "flat key = value configuration file");

  // plotdata
  auto *plot = app.add_subcommand("plotdata", "flatten stats JSONL into CSV");
  std::vector<std::string> pFiles;
  std::string pCsv;
  plot->add_option("stats", pFiles, "stats.jsonl file(s)")->required();
  plot->add_option("--csv", pCsv, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      Analysis a = analyzeProgram(aProg);
      if (!aLabels && !aReachFlag) aLabels = aReachFlag = true;
      if (aLabels) printLabels(a, std::cout);
      if (aReachFlag) printReach(a, std::cout);
      return 0;
    }

    if (*gen) {
      gSpec.rngSeed = gRng;
      GeneratedBench gb;
      if (gInfeasible) {
        gb = plantInfeasible(gSpec);
      } else {
        gSpec.plants.clear();
        for (int i = 0; i < gPlants; ++i) {
          PlantSpec ps;
          ps.inputTriggered = i != 0;
          ps.family = i == 0 ? Family::UnsignedOverflow
                             : static_cast<Family>((i - 1) % 4);
          gSpec.plants.push_back(ps);
        }
        gb = generate(gSpec);
      }
      fs::create_directories(gOut);
      std::ofstream ir(fs::path(gOut) / "prog.ir", std::ios::trunc);
      ir << gb.irText;
      std::ofstream mf(fs::path(gOut) / "manifest.csv", std::ios::trunc);
      mf << gb.manifestCsv();
      std::cout << "wrote " << (fs::path(gOut) / "prog.ir").string() << " ("
                << gb.plants.size() << " plants, " << gb.labels.labels.size()
                << " labels)\n";
      return 0;
    }

    if (*replay) {
      Analysis a = analyzeProgram(rProg);
      RunLimits lim;
      lim.instrBudget = rBudget;
      auto bytes = readBytesFile(rSeed);
      auto t = runConcrete(a.program, a.labels, bytes, lim);
      const char *stop = t.stop == StopReason::Returned ? "returned"
                         : t.stop == StopReason::BudgetExhausted
                             ? "budget-exhausted"
                             : "call-depth-exceeded";
      std::cout << "blocks=" << t.blockSeq.size() << " instrs=" << t.instrCount
                << " stop=" << stop << " ret=" << t.retCode << "\n";
      std::cout << "labels_reached=" << t.labelsReached.size();
      for (LabelId id : t.labelsReached) std::cout << " " << id;
      std::cout << "\n";
      for (auto &v : t.violations)
        std::cout << "violation label=" << v.label << " family="
                  << familyName(a.labels.labels[v.label - 1].family) << "\n";
      return 0;
    }

    if (*score) {
      Analysis a = analyzeProgram(sProg);
      CoverageMap cov;
      AttemptLedger ledger;
      std::vector<Seed> seeds;
      std::vector<fs::path> files;
      for (auto &entry : fs::directory_iterator(sSeeds))
        if (entry.is_regular_file()) files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      int nextId = 1;
      for (auto &f : files) {
        Seed s;
        s.id = nextId++;
        s.bytes = readBytesFile(f);
        s.bytes.resize(a.program.inputLen, 0);
        auto t = runConcrete(a.program, a.labels, s.bytes);
        cov.observe(t);
        attachTraceInfo(a.program, t, s);
        seeds.push_back(std::move(s));
      }
      for (auto &s : seeds) {
        auto sc = scoreSeed(s, a.reach, ledger, cov, sDecay);
        std::cout << "seed=" << s.id << " n=" << sc.n << " score=" << sc.score
                  << "\n";
        for (auto &term : sc.terms)
          std::cout << "  branch " << a.program.nodeName(term.site)
                    << " dir=" << int(term.dir) << " L=" << term.potential
                    << " S=" << term.attempts << " w=" << term.weight << "\n";
      }
      return 0;
    }

    if (*run) {
      if (!runConfig.empty())
        applyFlatConfig(runConfig, *run, runPolicy, cc, runManifest, runOut,
                        runSeeds, deterministic, noConcolic, stopPlanted);
      auto pol = policyFromName(runPolicy);
      if (!pol) {
        std::cerr << "unknown policy '" << runPolicy << "'\n";
        return 1;
      }
      cc.policy = *pol;
      cc.concolicEnabled = !noConcolic;
      cc.stopOnAllPlanted = stopPlanted;
      cc.deterministic = deterministic || cc.workers <= 1;
      if (deterministic) cc.workers = 1;
      return cmdRun(runProg, cc, runSeeds, runManifest, runOut);
    }

    if (*plot) {
      std::ostringstream csv;
      csv << "file,round,policy,edges,pairs,labels_reached,labels_triggered,"
             "planted_triggered\n";
      for (auto &f : pFiles) {
        std::ifstream in(f);
        if (!in) throw Error("cannot open " + f);
        std::string line;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          auto j = nlohmann::json::parse(line);
          csv << fs::path(f).filename().string() << "," << j["round"] << ","
              << j["policy"].get<std::string>() << "," << j["edges"] << ","
              << j["pairs"] << "," << j["labels_reached"] << ","
              << j["labels_triggered"] << "," << j["planted_triggered"] << "\n";
        }
      }
      if (pCsv.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream out(pCsv, std::ios::trunc);
        out << csv.str();
      }
      return 0;
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
