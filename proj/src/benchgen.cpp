#include "hfl/benchgen.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "hfl/icfg.hpp"
#include "hfl/interp.hpp"

namespace hfl {

namespace {

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::string bytesHex(const std::vector<uint8_t> &bytes) {
  static const char *digits = "0123456789abcdef";
  std::string out;
  for (uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

// Magic constants stay clear of the mutator's interesting-value table and
// trivially mutable patterns.
uint32_t drawMagic(Rng &rng) {
  static const std::set<uint32_t> banned = {0u,          0xFFu,       0x7Fu,
                                            0x80u,       0xFFFFu,     0x7FFFFFFFu,
                                            0x80000000u, 0xFFFFFFFFu};
  while (true) {
    uint32_t m = static_cast<uint32_t>(rng.next());
    if (banned.count(m)) continue;
    bool allSame = true;
    int plainBytes = 0;
    for (int i = 0; i < 4; ++i) {
      uint8_t b = static_cast<uint8_t>(m >> (8 * i));
      if (b != static_cast<uint8_t>(m)) allSame = false;
      if (b != 0x00 && b != 0xFF && b != 0x7F && b != 0x80) ++plainBytes;
    }
    if (allSame || plainBytes < 2) continue;
    return m;
  }
}

struct SiteRef {
  std::string fn;
  std::string block;
  int instr;
};

// Emits the labeled site for a plant into `body`; returns its SiteRef and
// the instruction index of the labeled op given the count already emitted.
struct PlantEmission {
  std::string code;
  int labeledInstrOffset; // index of the labeled op within the emitted code
  int instrCount;
};

PlantEmission emitPlantSite(const PlantSpec &ps, int plantIdx,
                            uint32_t triggerOffset) {
  std::ostringstream os;
  std::string p = "pl" + std::to_string(plantIdx) + "_";
  int n = 0, labeled = 0;
  if (ps.inputTriggered) {
    switch (ps.family) {
    case Family::UnsignedOverflow:
      os << "  " << p << "v = in.u32 " << triggerOffset << "\n";
      os << "  " << p << "r = add.u32 " << p << "v, 1\n";
      labeled = 1;
      n = 2;
      break;
    case Family::SignedOverflow:
      os << "  " << p << "v = in.u32 " << triggerOffset << "\n";
      os << "  " << p << "r = add.s32 " << p << "v, 1\n";
      labeled = 1;
      n = 2;
      break;
    case Family::OversizedShift:
      os << "  " << p << "b = in.u8 " << triggerOffset << "\n";
      os << "  " << p << "w = zext.32 " << p << "b\n";
      os << "  " << p << "x = const.u32 1\n";
      os << "  " << p << "r = shl.32 " << p << "x, " << p << "w\n";
      labeled = 3;
      n = 4;
      break;
    case Family::OOB:
      os << "  " << p << "a = arr.alloc.32 8\n";
      os << "  " << p << "b = in.u8 " << triggerOffset << "\n";
      os << "  " << p << "w = zext.32 " << p << "b\n";
      os << "  " << p << "r = arr.load " << p << "a, " << p << "w\n";
      labeled = 3;
      n = 4;
      break;
    }
  } else {
    switch (ps.family) {
    case Family::UnsignedOverflow:
      os << "  " << p << "c = const.u32 0xFFFFFFFF\n";
      os << "  " << p << "r = add.u32 " << p << "c, 1\n";
      labeled = 1;
      n = 2;
      break;
    case Family::SignedOverflow:
      os << "  " << p << "c = const.s32 0x7FFFFFFF\n";
      os << "  " << p << "r = add.s32 " << p << "c, 1\n";
      labeled = 1;
      n = 2;
      break;
    case Family::OversizedShift:
      os << "  " << p << "c = const.u32 40\n";
      os << "  " << p << "x = const.u32 1\n";
      os << "  " << p << "r = shl.32 " << p << "x, " << p << "c\n";
      labeled = 2;
      n = 3;
      break;
    case Family::OOB:
      os << "  " << p << "a = arr.alloc.32 8\n";
      os << "  " << p << "c = const.u32 12\n";
      os << "  " << p << "r = arr.load " << p << "a, " << p << "c\n";
      labeled = 2;
      n = 3;
      break;
    }
  }
  return {os.str(), labeled, n};
}

// Trigger bytes that make the planted condition fire.
void applyTrigger(std::vector<uint8_t> &input, const PlantSpec &ps,
                  uint32_t off) {
  switch (ps.family) {
  case Family::UnsignedOverflow:
    for (int i = 0; i < 4; ++i) input[off + i] = 0xFF;
    break;
  case Family::SignedOverflow:
    input[off] = 0xFF;
    input[off + 1] = 0xFF;
    input[off + 2] = 0xFF;
    input[off + 3] = 0x7F;
    break;
  case Family::OversizedShift:
    input[off] = 0x20; // 32
    break;
  case Family::OOB:
    input[off] = 0x08; // size is 8
    break;
  }
}

// Label-dense / label-sparse handler bodies: straight-line eligible ops on
// small constants, reached whenever the handler runs, never violating.
std::string handlerBody(const std::string &prefix, int nLabels, Rng &rng) {
  std::ostringstream os;
  os << "  " << prefix << "acc = const.u32 1\n";
  for (int i = 0; i < nLabels; ++i) {
    int kind = static_cast<int>(rng.below(4));
    std::string d = prefix + "t" + std::to_string(i);
    switch (kind) {
    case 0:
      os << "  " << d << " = add.u32 " << prefix << "acc, "
         << rng.between(1, 100) << "\n";
      break;
    case 1:
      os << "  " << d << " = mul.u32 " << prefix << "acc, "
         << rng.between(1, 3) << "\n";
      break;
    case 2:
      os << "  " << d << " = sub.s32 " << prefix << "acc, "
         << rng.between(1, 50) << "\n";
      break;
    default:
      os << "  " << d << " = lshr.32 " << prefix << "acc, "
         << rng.between(0, 7) << "\n";
      break;
    }
  }
  return os.str();
}

} // namespace

std::string GeneratedBench::manifestCsv() const {
  std::ostringstream os;
  os << "bug_id,offset,magic_hex,input_hex\n";
  for (auto &p : plants)
    os << p.labelId << "," << p.guardOffset << "," << hex(p.magic) << ","
       << bytesHex(p.groundTruthInput) << "\n";
  return os.str();
}

std::vector<LabelId> GeneratedBench::plantedLabelIds() const {
  std::vector<LabelId> ids;
  for (auto &p : plants) ids.push_back(p.labelId);
  return ids;
}

GeneratedBench generate(const BenchSpec &spec) {
  Rng rng(spec.rngSeed);
  BenchSpec sp = spec;
  if (sp.plants.empty()) {
    PlantSpec dense;
    dense.inputTriggered = false;
    PlantSpec extra;
    extra.inputTriggered = true;
    sp.plants = {dense, extra};
  }

  // Offset allocation: byte 0 is the dispatch switch.
  uint32_t nextOff = 4;
  auto alloc = [&](uint32_t n) {
    uint32_t off = nextOff;
    nextOff += n;
    if (nextOff > sp.inputLen)
      throw Error("benchmark spec infeasible: input too short for plants");
    return off;
  };

  struct PlantLayout {
    PlantSpec ps;
    uint32_t guardOff, trigOff = 0;
    uint32_t magic;
  };
  std::vector<PlantLayout> layout;
  for (size_t i = 0; i < sp.plants.size(); ++i) {
    PlantLayout pl;
    pl.ps = sp.plants[i];
    pl.guardOff = alloc(4);
    pl.magic = drawMagic(rng);
    if (pl.ps.inputTriggered) {
      bool byteTrig = pl.ps.family == Family::OversizedShift ||
                      pl.ps.family == Family::OOB;
      pl.trigOff = alloc(byteTrig ? 1 : 4);
    }
    layout.push_back(pl);
  }
  uint32_t sparseGuardOff = alloc(4);
  uint32_t sparseMagic = drawMagic(rng);

  // The sparse arm also reaches the later plant sites, so scale the dense
  // handler up until the skew holds by construction.
  int skew = std::max(1, sp.densitySkew);
  int sparseLabels = std::max(1, sp.denseLabels / skew);
  int sparseSideTotal = sparseLabels + static_cast<int>(sp.plants.size()) - 1;
  int denseEmit = std::max(sp.denseLabels, skew * sparseSideTotal);

  std::ostringstream ir;
  ir << "input " << sp.inputLen << "\n";
  ir << "entry main\n";
  if (sp.fillerFunctions > 0) {
    ir << "table ";
    for (int i = 0; i < sp.fillerFunctions; ++i)
      ir << (i ? ", " : "") << "filler" << i;
    ir << "\n";
  }

  std::vector<SiteRef> plantSites(layout.size());

  // main: dispatch, dense guard on path A, remaining guards + filler on B.
  ir << "func main(entry=b0) {\n";
  ir << "b0:\n";
  ir << "  t = in.u8 0\n";
  ir << "  csw = cmp.eq t, 0\n";
  ir << "  br csw, pA, pB\n";
  ir << "pA:\n";
  ir << "  g0 = in.u32 " << layout[0].guardOff << "\n";
  ir << "  c0 = cmp.eq g0, " << hex(layout[0].magic) << "\n";
  ir << "  br c0, callD, endA\n";
  ir << "callD:\n";
  ir << "  vd = call h_dense\n";
  ir << "  jmp endA\n";
  ir << "endA:\n";
  ir << "  ret 0\n";

  // Path B: sparse guard, then per-plant guards, then the filler chain.
  ir << "pB:\n";
  ir << "  gs = in.u32 " << sparseGuardOff << "\n";
  ir << "  cs = cmp.eq gs, " << hex(sparseMagic) << "\n";
  ir << "  br cs, callS, pg1\n";
  ir << "callS:\n";
  ir << "  vs = call h_sparse\n";
  ir << "  jmp pg1\n";

  for (size_t i = 1; i < layout.size(); ++i) {
    std::string cur = "pg" + std::to_string(i);
    std::string hit = "ph" + std::to_string(i);
    std::string next = i + 1 < layout.size() ? "pg" + std::to_string(i + 1) : "fl0";
    ir << cur << ":\n";
    auto &pl = layout[i];
    if (pl.ps.wordGuard) {
      ir << "  g" << i << " = in.u32 " << pl.guardOff << "\n";
      ir << "  c" << i << " = cmp.eq g" << i << ", " << hex(pl.magic) << "\n";
      ir << "  br c" << i << ", " << hit << ", " << next << "\n";
    } else {
      // chained byte compares
      for (int b = 0; b < 4; ++b) {
        std::string lbl = b == 0 ? cur : cur + "_" + std::to_string(b);
        if (b > 0) ir << lbl << ":\n";
        ir << "  gb" << i << "_" << b << " = in.u8 " << (pl.guardOff + b) << "\n";
        ir << "  cb" << i << "_" << b << " = cmp.eq gb" << i << "_" << b << ", "
           << hex((pl.magic >> (8 * b)) & 0xFF) << "\n";
        std::string onHit = b == 3 ? hit : cur + "_" + std::to_string(b + 1);
        ir << "  br cb" << i << "_" << b << ", " << onHit << ", " << next << "\n";
      }
    }
    ir << hit << ":\n";
    auto em = emitPlantSite(pl.ps, static_cast<int>(i), pl.trigOff);
    ir << em.code;
    plantSites[i] = {"main", hit, em.labeledInstrOffset};
    ir << "  jmp " << next << "\n";
  }

  if (layout.size() == 1) ir << "pg1:\n  jmp fl0\n";

  // Filler: a chain of byte threshold compares; each stage may call a
  // filler function on one arm.
  for (int d = 0; d < sp.branchDepth; ++d) {
    std::string cur = "fl" + std::to_string(d);
    std::string nxt = d + 1 < sp.branchDepth ? "fl" + std::to_string(d + 1) : "flEnd";
    ir << cur << ":\n";
    uint32_t off = 1 + static_cast<uint32_t>(d % 3);
    ir << "  f" << d << " = in.u8 " << off << "\n";
    ir << "  fc" << d << " = cmp.ult f" << d << ", " << rng.between(16, 240) << "\n";
    ir << "  br fc" << d << ", " << cur << "lo, " << cur << "hi\n";
    for (const char *arm : {"lo", "hi"}) {
      ir << cur << arm << ":\n";
      if (sp.fillerFunctions > 0 && rng.chance(0.5)) {
        int fi = static_cast<int>(rng.below(sp.fillerFunctions));
        if (rng.chance(sp.indirectCallFraction)) {
          ir << "  fv" << d << arm << " = const.u32 " << fi << "\n";
          ir << "  fr" << d << arm << " = icall.32 fv" << d << arm << ", f" << d
             << "\n";
        } else {
          ir << "  fr" << d << arm << " = call filler" << fi << ", f" << d << "\n";
        }
      }
      ir << "  jmp " << nxt << "\n";
    }
  }
  ir << "flEnd:\n  ret 0\n";
  ir << "}\n";

  // Dense handler: plant 0 site, the dense label block, and an internal
  // byte-guarded branch so seeds inside the handler keep a scorable
  // uncovered arm.
  ir << "func h_dense(entry=d0) {\n";
  ir << "d0:\n";
  {
    auto em = emitPlantSite(layout[0].ps, 0, layout[0].trigOff);
    ir << em.code;
    plantSites[0] = {"h_dense", "d0", em.labeledInstrOffset};
    ir << handlerBody("d_", denseEmit, rng);
    ir << "  db = in.u8 " << 1 + rng.below(3) << "\n";
    ir << "  dc = cmp.ult db, " << rng.between(64, 192) << "\n";
    ir << "  br dc, d1, d2\n";
    ir << "d1:\n" << handlerBody("dx_", 3, rng) << "  jmp d3\n";
    ir << "d2:\n" << handlerBody("dy_", 3, rng) << "  jmp d3\n";
    ir << "d3:\n  ret 0\n";
  }
  ir << "}\n";

  ir << "func h_sparse(entry=s0) {\n";
  ir << "s0:\n";
  ir << handlerBody("s_", sparseLabels, rng);
  ir << "  ret 0\n";
  ir << "}\n";

  for (int i = 0; i < sp.fillerFunctions; ++i) {
    int chain = std::max(1, sp.blocksPerFunction - 2);
    ir << "func filler" << i << "(x:8, entry=f0) {\n";
    for (int b = 0; b < chain; ++b) {
      ir << "f" << b << ":\n";
      ir << "  y" << b << " = xor.8 x, " << rng.below(256) << "\n";
      ir << "  c" << b << " = cmp.ult y" << b << ", " << rng.between(32, 224)
         << "\n";
      std::string next = b + 1 < chain ? "f" + std::to_string(b + 1) : "fYes";
      ir << "  br c" << b << ", " << next << ", fNo\n";
    }
    ir << "fYes:\n  ret 1\nfNo:\n  ret 0\n";
    ir << "}\n";
  }

  GeneratedBench out;
  out.irText = ir.str();
  out.program = parseProgram(out.irText);
  out.labels = placeLabels(out.program);

  // Resolve plant label ids and build ground-truth inputs.
  for (size_t i = 0; i < layout.size(); ++i) {
    auto &pl = layout[i];
    PlantedBugInfo info;
    info.bugIndex = static_cast<int>(i);
    info.family = pl.ps.family;
    info.guardOffset = pl.guardOff;
    info.magic = pl.magic;
    info.wordGuard = pl.ps.wordGuard;
    info.inputTriggered = pl.ps.inputTriggered;
    info.triggerOffset = pl.trigOff;

    int fn = out.program.funcIdx(plantSites[i].fn);
    int blk = out.program.functions[fn].blockIdx(plantSites[i].block);
    const BugLabel *l = out.labels.at(fn, blk, plantSites[i].instr);
    if (!l) throw Error("benchmark generation: plant site has no label");
    info.labelId = l->id;

    std::vector<uint8_t> input(sp.inputLen, 0);
    input[0] = i == 0 ? 0 : 1; // dispatch: path A only for the dense plant
    for (int b = 0; b < 4; ++b)
      input[pl.guardOff + b] = static_cast<uint8_t>(pl.magic >> (8 * b));
    info.reachInput = input;
    if (pl.ps.inputTriggered) applyTrigger(input, pl.ps, pl.trigOff);
    info.groundTruthInput = input;
    out.plants.push_back(std::move(info));
  }

  // Certification by construction: ground truth triggers exactly its own
  // planted label; the reach input reaches but does not trigger
  // input-triggered plants; planted labels survive trimming.
  auto plantedVec = out.plantedLabelIds();
  std::set<LabelId> plantedIds(plantedVec.begin(), plantedVec.end());
  for (auto &p : out.plants) {
    auto t = runConcrete(out.program, out.labels, p.groundTruthInput);
    bool own = false;
    for (auto &v : t.violations) {
      if (!plantedIds.count(v.label)) continue;
      if (v.label != p.labelId)
        throw Error("benchmark generation: cross-plant trigger");
      own = true;
    }
    if (!own) throw Error("benchmark generation: ground truth does not trigger");
    if (p.inputTriggered) {
      auto r = runConcrete(out.program, out.labels, p.reachInput);
      if (!r.reachedLabel(p.labelId) || r.violatedLabel(p.labelId))
        throw Error("benchmark generation: reach input broken");
    }
  }
  auto [trimmedSet, report] = trimLabels(out.program, out.labels);
  for (LabelId id : plantedIds)
    if (!trimmedSet.labels[id - 1].live)
      throw Error("benchmark generation: plant was trimmed");

  // Density asymmetry between the two handler arms.
  {
    auto &f = out.program.functions[out.program.funcIdx("main")];
    int pA = f.blockIdx("pA"), pB = f.blockIdx("pB");
    auto &ta = f.blocks[pA].term, &tb = f.blocks[pB].term;
    out.denseArmTarget = out.program.node(out.program.funcIdx("main"), ta.thenIdx);
    out.sparseArmTarget = out.program.node(out.program.funcIdx("main"), tb.thenIdx);
    InterCfg cfg = buildInterCfg(out.program);
    ReachTable rt = computeReach(cfg, out.labels);
    if (rt.potential(out.denseArmTarget) <
        sp.densitySkew * rt.potential(out.sparseArmTarget))
      throw Error("benchmark generation: density skew not met");
  }
  return out;
}

GeneratedBench plantInfeasible(const BenchSpec &spec, bool survivesTrim) {
  std::ostringstream ir;
  uint32_t inputLen = std::max<uint32_t>(1, spec.inputLen);
  ir << "input " << inputLen << "\n";
  ir << "entry main\n";
  ir << "func main(entry=b0) {\n";
  ir << "b0:\n";
  ir << "  x = in.u8 0\n";
  ir << "  c = cmp.ult x, 10\n";
  ir << "  br c, b1, b2\n";
  ir << "b1:\n";
  if (survivesTrim) {
    // bitwise step hides the guard from the one-conversion trim rule
    ir << "  y = zext.32 x\n";
    ir << "  z = and.32 y, 0xFF\n";
    ir << "  a = arr.alloc.32 16\n";
    ir << "  v = arr.load a, z\n";
  } else {
    ir << "  a = arr.alloc.32 16\n";
    ir << "  v = arr.load a, x\n";
  }
  ir << "  jmp b2\n";
  ir << "b2:\n";
  ir << "  ret 0\n";
  ir << "}\n";

  GeneratedBench out;
  out.irText = ir.str();
  out.program = parseProgram(out.irText);
  out.labels = placeLabels(out.program);

  int fn = out.program.funcIdx("main");
  int blk = out.program.functions[fn].blockIdx("b1");
  int instr = survivesTrim ? 3 : 1;
  const BugLabel *l = out.labels.at(fn, blk, instr);
  if (!l) throw Error("infeasible plant: label not found");

  PlantedBugInfo info;
  info.labelId = l->id;
  info.family = Family::OOB;
  info.inputTriggered = true;
  info.groundTruthInput.assign(inputLen, 0); // none exists; kept for shape
  info.reachInput.assign(inputLen, 0);
  out.plants.push_back(info);

  auto [trimmedSet, report] = trimLabels(out.program, out.labels);
  bool live = trimmedSet.labels[l->id - 1].live;
  if (survivesTrim && !live)
    throw Error("infeasible plant: expected the label to survive trimming");

  // Certify untriggerability: exhaustively for tiny inputs, and in any
  // case the guarded index is masked below the array size by construction.
  if (inputLen <= 2) {
    RunLimits lim;
    lim.recordEdges = false;
    uint64_t total = 1ull << (8 * inputLen);
    for (uint64_t v = 0; v < total; ++v) {
      std::vector<uint8_t> input(inputLen);
      for (uint32_t i = 0; i < inputLen; ++i)
        input[i] = static_cast<uint8_t>(v >> (8 * i));
      auto t = runConcrete(out.program, out.labels, input, lim);
      if (t.violatedLabel(l->id))
        throw Error("infeasible plant: triggered during certification");
    }
  }
  return out;
}

} // namespace hfl
