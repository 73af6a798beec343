#include "hfl/ir.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace hfl {

bool isBinArith(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div ||
         op == Op::Rem;
}
bool isShift(Op op) {
  return op == Op::Shl || op == Op::Lshr || op == Op::Ashr;
}
bool isBitwise(Op op) {
  return op == Op::And || op == Op::Or || op == Op::Xor;
}

const char *opName(Op op) {
  switch (op) {
  case Op::Const: return "const";
  case Op::In: return "in";
  case Op::Add: return "add";
  case Op::Sub: return "sub";
  case Op::Mul: return "mul";
  case Op::Div: return "div";
  case Op::Rem: return "rem";
  case Op::Shl: return "shl";
  case Op::Lshr: return "lshr";
  case Op::Ashr: return "ashr";
  case Op::And: return "and";
  case Op::Or: return "or";
  case Op::Xor: return "xor";
  case Op::Zext: return "zext";
  case Op::Sext: return "sext";
  case Op::Trunc: return "trunc";
  case Op::Cmp: return "cmp";
  case Op::ArrAlloc: return "arr.alloc";
  case Op::ArrLoad: return "arr.load";
  case Op::ArrStore: return "arr.store";
  case Op::Call: return "call";
  case Op::Icall: return "icall";
  }
  return "?";
}

const char *cmpName(CmpKind k) {
  switch (k) {
  case CmpKind::Eq: return "eq";
  case CmpKind::Ne: return "ne";
  case CmpKind::Slt: return "slt";
  case CmpKind::Sle: return "sle";
  case CmpKind::Ult: return "ult";
  case CmpKind::Ule: return "ule";
  }
  return "?";
}

int Function::blockIdx(const std::string &label) const {
  auto it = blockIndex.find(label);
  return it == blockIndex.end() ? -1 : it->second;
}

int Program::funcIdx(const std::string &name) const {
  auto it = funcIndex.find(name);
  return it == funcIndex.end() ? -1 : it->second;
}

std::pair<int, int> Program::nodeLoc(NodeId n) const {
  int fn = static_cast<int>(functions.size()) - 1;
  while (fn > 0 && nodeBase[fn] > n) --fn;
  return {fn, static_cast<int>(n - nodeBase[fn])};
}

std::string Program::nodeName(NodeId n) const {
  auto [fn, blk] = nodeLoc(n);
  return functions[fn].name + ":" + functions[fn].blocks[blk].label;
}

namespace {

struct Token {
  enum class K { Ident, Number, Punct, End } kind;
  std::string text;
  uint64_t value = 0;
  int col = 0;
};

struct LineLexer {
  std::vector<Token> toks;
  size_t pos = 0;
  int line;

  LineLexer(const std::string &raw, int line) : line(line) {
    std::string s = raw;
    if (auto c = s.find(';'); c != std::string::npos) s.resize(c);
    size_t i = 0;
    while (i < s.size()) {
      char ch = s[i];
      if (std::isspace(static_cast<unsigned char>(ch))) { ++i; continue; }
      int col = static_cast<int>(i) + 1;
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        size_t j = i;
        while (j < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[j])) ||
                s[j] == '_' || s[j] == '.'))
          ++j;
        toks.push_back({Token::K::Ident, s.substr(i, j - i), 0, col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(ch)) ||
                 (ch == '-' && i + 1 < s.size() &&
                  std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
        bool neg = ch == '-';
        size_t j = i + (neg ? 1 : 0);
        uint64_t v = 0;
        if (j + 1 < s.size() && s[j] == '0' && (s[j + 1] == 'x' || s[j + 1] == 'X')) {
          j += 2;
          size_t start = j;
          while (j < s.size() && std::isxdigit(static_cast<unsigned char>(s[j]))) {
            char d = s[j];
            uint64_t dig = d <= '9' ? d - '0' : (d | 0x20) - 'a' + 10;
            v = v * 16 + dig;
            ++j;
          }
          if (j == start) throw ParseError(line, col, "malformed hex literal");
        } else {
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
            v = v * 10 + (s[j] - '0');
            ++j;
          }
        }
        if (neg) v = ~v + 1;
        toks.push_back({Token::K::Number, s.substr(i, j - i), v, col});
        i = j;
      } else if (std::string("(){}=,:").find(ch) != std::string::npos) {
        toks.push_back({Token::K::Punct, std::string(1, ch), 0, col});
        ++i;
      } else {
        throw ParseError(line, col, std::string("unexpected character '") + ch + "'");
      }
    }
    toks.push_back({Token::K::End, "", 0, static_cast<int>(s.size()) + 1});
  }

  const Token &peek() const { return toks[pos]; }
  Token take() { return toks[pos++]; }
  bool atEnd() const { return peek().kind == Token::K::End; }

  Token expect(Token::K k, const std::string &what) {
    if (peek().kind != k)
      throw ParseError(line, peek().col, "expected " + what);
    return take();
  }
  void expectPunct(const std::string &p) {
    if (peek().kind != Token::K::Punct || peek().text != p)
      throw ParseError(line, peek().col, "expected '" + p + "'");
    take();
  }
  bool tryPunct(const std::string &p) {
    if (peek().kind == Token::K::Punct && peek().text == p) {
      take();
      return true;
    }
    return false;
  }
};

std::vector<std::string> splitDots(const std::string &s) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t dot = s.find('.', start);
    if (dot == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, dot - start));
    start = dot + 1;
  }
  return parts;
}

bool parseWidth(const std::string &s, Width &w) {
  if (s == "1") w = 1;
  else if (s == "8") w = 8;
  else if (s == "16") w = 16;
  else if (s == "32") w = 32;
  else if (s == "64") w = 64;
  else return false;
  return true;
}

bool parseSignWidth(const std::string &s, bool &sgn, Width &w) {
  if (s.size() < 2 || (s[0] != 's' && s[0] != 'u')) return false;
  sgn = s[0] == 's';
  return parseWidth(s.substr(1), w);
}

Operand parseOperand(LineLexer &lx) {
  const Token &t = lx.peek();
  if (t.kind == Token::K::Number) return Operand::immediate(lx.take().value);
  if (t.kind == Token::K::Ident) return Operand::ofReg(lx.take().text);
  throw ParseError(lx.line, t.col, "expected register or immediate");
}

std::vector<Operand> parseOperandList(LineLexer &lx) {
  std::vector<Operand> out;
  if (lx.atEnd()) return out;
  out.push_back(parseOperand(lx));
  while (lx.tryPunct(",")) out.push_back(parseOperand(lx));
  return out;
}

// Parses one instruction or terminator from the current lexer position.
// Returns true if it was a terminator (stored into term).
bool parseInstrOrTerm(LineLexer &lx, Instr &ins, Terminator &term) {
  Token first = lx.expect(Token::K::Ident, "instruction");
  const std::string &w0 = first.text;

  if (w0 == "jmp") {
    term.kind = Terminator::Kind::Jmp;
    term.target0 = lx.expect(Token::K::Ident, "block label").text;
    term.line = lx.line;
    return true;
  }
  if (w0 == "br") {
    term.kind = Terminator::Kind::Br;
    term.cond = parseOperand(lx);
    lx.expectPunct(",");
    term.target0 = lx.expect(Token::K::Ident, "block label").text;
    lx.expectPunct(",");
    term.target1 = lx.expect(Token::K::Ident, "block label").text;
    term.line = lx.line;
    return true;
  }
  if (w0 == "ret") {
    term.kind = Terminator::Kind::Ret;
    if (!lx.atEnd()) term.retVal = parseOperand(lx);
    term.line = lx.line;
    return true;
  }

  std::string dest;
  std::string opTok = w0;
  if (lx.peek().kind == Token::K::Punct && lx.peek().text == "=") {
    dest = w0;
    lx.take();
    opTok = lx.expect(Token::K::Ident, "opcode").text;
  }

  auto parts = splitDots(opTok);
  const std::string &name = parts[0];
  ins.dest = dest;
  ins.line = lx.line;
  auto bad = [&](const std::string &msg) -> ParseError {
    return ParseError(lx.line, first.col, msg + " in '" + opTok + "'");
  };

  if (name == "const") {
    if (parts.size() != 2 || !parseSignWidth(parts[1], ins.isSigned, ins.width))
      throw bad("const needs .s<w>/.u<w> suffix");
    ins.op = Op::Const;
    Token v = lx.take();
    if (v.kind != Token::K::Number) throw bad("const needs an immediate");
    ins.aux = v.value;
  } else if (name == "in") {
    bool sgn;
    if (parts.size() != 2 || !parseSignWidth(parts[1], sgn, ins.width) || sgn ||
        (ins.width != 8 && ins.width != 16 && ins.width != 32))
      throw bad("in needs .u8/.u16/.u32 suffix");
    ins.op = Op::In;
    Token off = lx.take();
    if (off.kind != Token::K::Number) throw bad("in needs a constant offset");
    ins.aux = off.value;
  } else if (name == "add" || name == "sub" || name == "mul" || name == "div" ||
             name == "rem") {
    if (parts.size() != 2 || !parseSignWidth(parts[1], ins.isSigned, ins.width) ||
        ins.width < 8)
      throw bad("arith op needs .s<w>/.u<w> suffix");
    ins.op = name == "add" ? Op::Add
           : name == "sub" ? Op::Sub
           : name == "mul" ? Op::Mul
           : name == "div" ? Op::Div : Op::Rem;
    ins.args = parseOperandList(lx);
  } else if (name == "shl" || name == "lshr" || name == "ashr") {
    if (parts.size() != 2 || !parseWidth(parts[1], ins.width) || ins.width < 8)
      throw bad("shift needs .<w> suffix");
    ins.op = name == "shl" ? Op::Shl : name == "lshr" ? Op::Lshr : Op::Ashr;
    ins.args = parseOperandList(lx);
  } else if (name == "and" || name == "or" || name == "xor") {
    if (parts.size() != 2 || !parseWidth(parts[1], ins.width))
      throw bad("bitwise op needs .<w> suffix");
    ins.op = name == "and" ? Op::And : name == "or" ? Op::Or : Op::Xor;
    ins.args = parseOperandList(lx);
  } else if (name == "zext" || name == "sext" || name == "trunc") {
    if (parts.size() != 2 || !parseWidth(parts[1], ins.width))
      throw bad("conversion needs target .<w> suffix");
    ins.op = name == "zext" ? Op::Zext : name == "sext" ? Op::Sext : Op::Trunc;
    ins.args = parseOperandList(lx);
  } else if (name == "cmp") {
    if (parts.size() != 2) throw bad("cmp needs a kind suffix");
    const std::string &k = parts[1];
    if (k == "eq") ins.cmp = CmpKind::Eq;
    else if (k == "ne") ins.cmp = CmpKind::Ne;
    else if (k == "slt") ins.cmp = CmpKind::Slt;
    else if (k == "sle") ins.cmp = CmpKind::Sle;
    else if (k == "ult") ins.cmp = CmpKind::Ult;
    else if (k == "ule") ins.cmp = CmpKind::Ule;
    else throw bad("unknown cmp kind");
    ins.op = Op::Cmp;
    ins.width = 1;
    ins.args = parseOperandList(lx);
  } else if (name == "arr") {
    if (parts.size() < 2) throw bad("unknown arr op");
    const std::string &k = parts[1];
    if (k == "alloc") {
      if (parts.size() != 3 || !parseWidth(parts[2], ins.width) || ins.width < 8)
        throw bad("arr.alloc needs element .<w> suffix");
      ins.op = Op::ArrAlloc;
      Token sz = lx.take();
      if (sz.kind != Token::K::Number) throw bad("arr.alloc needs constant size");
      ins.aux = sz.value;
    } else if (k == "load" || k == "store") {
      if (parts.size() != 2) throw bad("arr.load/store take no width");
      ins.op = k == "load" ? Op::ArrLoad : Op::ArrStore;
      ins.args = parseOperandList(lx);
    } else {
      throw bad("unknown arr op");
    }
  } else if (name == "call") {
    ins.op = Op::Call;
    ins.callee = lx.expect(Token::K::Ident, "callee name").text;
    if (lx.tryPunct(",")) {
      ins.args.push_back(parseOperand(lx));
      while (lx.tryPunct(",")) ins.args.push_back(parseOperand(lx));
    }
  } else if (name == "icall") {
    if (parts.size() != 2 || !parseWidth(parts[1], ins.width) || ins.width < 8)
      throw bad("icall needs result .<w> suffix");
    ins.op = Op::Icall;
    ins.args = parseOperandList(lx);
    if (ins.args.empty()) throw bad("icall needs a table index operand");
  } else {
    throw bad("unknown opcode '" + name + "'");
  }

  if (!lx.atEnd())
    throw ParseError(lx.line, lx.peek().col, "trailing tokens");
  return false;
}

} // namespace

Program parseProgram(const std::string &text) {
  Program p;
  bool sawEntry = false, sawInput = false;

  Function *curFn = nullptr;
  BasicBlock *curBlock = nullptr;
  bool blockClosed = false; // terminator seen for curBlock

  // Braces may share a line with other content; give them their own
  // logical lines while remembering where each came from.
  std::string cooked;
  std::vector<int> lineMap{0};
  {
    int origLine = 1;
    bool inComment = false;
    auto newline = [&](int l) {
      cooked.push_back('\n');
      lineMap.push_back(l);
    };
    lineMap.push_back(origLine);
    for (char ch : text) {
      if (ch == '\n') {
        inComment = false;
        newline(++origLine);
        continue;
      }
      if (inComment) continue;
      if (ch == ';') { inComment = true; continue; }
      if (ch == '{') {
        cooked.push_back('{');
        newline(origLine);
      } else if (ch == '}') {
        newline(origLine);
        cooked.push_back('}');
        newline(origLine);
      } else {
        cooked.push_back(ch);
      }
    }
  }

  std::istringstream is(cooked);
  std::string raw;
  int cookedNo = 0;
  int lastLine = 1;
  while (std::getline(is, raw)) {
    ++cookedNo;
    int lineNo = cookedNo < static_cast<int>(lineMap.size()) ? lineMap[cookedNo]
                                                             : cookedNo;
    lastLine = lineNo;
    LineLexer lx(raw, lineNo);
    if (lx.atEnd()) continue;

    if (!curFn) {
      Token head = lx.expect(Token::K::Ident, "directive or 'func'");
      if (head.text == "input") {
        Token n = lx.expect(Token::K::Number, "input length");
        if (n.value == 0 || n.value > (1u << 20))
          throw ParseError(lineNo, n.col, "input length out of range");
        p.inputLen = static_cast<uint32_t>(n.value);
        sawInput = true;
      } else if (head.text == "entry") {
        p.entry = lx.expect(Token::K::Ident, "entry function name").text;
        sawEntry = true;
      } else if (head.text == "table") {
        p.funcTable.push_back(lx.expect(Token::K::Ident, "function name").text);
        while (lx.tryPunct(","))
          p.funcTable.push_back(lx.expect(Token::K::Ident, "function name").text);
      } else if (head.text == "func") {
        p.functions.emplace_back();
        curFn = &p.functions.back();
        curFn->line = lineNo;
        curFn->name = lx.expect(Token::K::Ident, "function name").text;
        lx.expectPunct("(");
        while (true) {
          Token t = lx.expect(Token::K::Ident, "parameter or entry=");
          if (t.text == "entry") {
            lx.expectPunct("=");
            curFn->entryBlock = lx.expect(Token::K::Ident, "entry block label").text;
            break;
          }
          Param prm;
          prm.name = t.text;
          if (lx.tryPunct(":")) {
            Token w = lx.take();
            Width pw;
            if (w.kind != Token::K::Number || !parseWidth(w.text, pw) || pw < 8)
              throw ParseError(lineNo, w.col, "bad parameter width");
            prm.width = pw;
          }
          curFn->params.push_back(prm);
          lx.expectPunct(",");
        }
        lx.expectPunct(")");
        lx.expectPunct("{");
        if (!lx.atEnd())
          throw ParseError(lineNo, lx.peek().col, "trailing tokens after '{'");
        curBlock = nullptr;
      } else {
        throw ParseError(lineNo, head.col, "expected directive or 'func'");
      }
      if (head.text != "func" && !lx.atEnd())
        throw ParseError(lineNo, lx.peek().col, "trailing tokens");
      continue;
    }

    // Inside a function body.
    if (lx.tryPunct("}")) {
      if (!lx.atEnd())
        throw ParseError(lineNo, lx.peek().col, "trailing tokens after '}'");
      if (curBlock && !blockClosed)
        throw ValidationError(lineNo, "block '" + curBlock->label +
                                          "' has no terminator");
      if (curFn->blocks.empty())
        throw ValidationError(lineNo, "function '" + curFn->name + "' is empty");
      curFn = nullptr;
      curBlock = nullptr;
      continue;
    }

    // Label line: IDENT ':' [instr]
    if (lx.peek().kind == Token::K::Ident && lx.toks.size() >= 2 &&
        lx.toks[lx.pos + 1].kind == Token::K::Punct &&
        lx.toks[lx.pos + 1].text == ":") {
      if (curBlock && !blockClosed)
        throw ValidationError(lineNo, "block '" + curBlock->label +
                                          "' has no terminator");
      Token lbl = lx.take();
      lx.take(); // ':'
      curFn->blocks.emplace_back();
      curBlock = &curFn->blocks.back();
      curBlock->label = lbl.text;
      curBlock->line = lineNo;
      blockClosed = false;
      if (lx.atEnd()) continue;
      // fall through to instruction on the same line
    }

    if (!curBlock)
      throw ParseError(lineNo, lx.peek().col, "expected block label");
    if (blockClosed)
      throw ValidationError(lineNo, "instruction after terminator in block '" +
                                        curBlock->label + "'");
    Instr ins;
    Terminator term;
    if (parseInstrOrTerm(lx, ins, term)) {
      curBlock->term = term;
      blockClosed = true;
    } else {
      curBlock->instrs.push_back(std::move(ins));
    }
  }
  if (curFn)
    throw ParseError(lastLine, 1, "unterminated function '" + curFn->name + "'");
  if (!sawEntry) p.entry = "main";
  (void)sawInput;

  validateProgram(p);
  return p;
}

namespace {

struct SlotInfo {
  Width width = 0;        // int registers; 0 = not yet known
  bool isArray = false;
  Width elemWidth = 0;
  int arraySize = 0;
  bool fromCall = false;  // width pending callee return width
};

Width operandWidth(const Function &f, const std::vector<SlotInfo> &slots,
                   const Operand &o) {
  if (o.isImm) return 0; // adopts context width
  auto it = f.regSlot.find(o.reg);
  if (it == f.regSlot.end()) return 0;
  return slots[it->second].width;
}

} // namespace

void validateProgram(Program &p) {
  if (p.functions.empty())
    throw ValidationError(0, "program has no functions");
  if (p.entry.empty()) p.entry = "main";

  p.funcIndex.clear();
  for (size_t i = 0; i < p.functions.size(); ++i) {
    auto &f = p.functions[i];
    if (p.funcIndex.count(f.name))
      throw ValidationError(f.line, "duplicate function '" + f.name + "'");
    p.funcIndex[f.name] = static_cast<int>(i);
  }
  p.entryIdx = p.funcIdx(p.entry);
  if (p.entryIdx < 0)
    throw ValidationError(0, "entry function '" + p.entry + "' not found");
  if (!p.functions[p.entryIdx].params.empty())
    throw ValidationError(p.functions[p.entryIdx].line,
                          "entry function must take no parameters");

  p.funcTableIdx.clear();
  for (auto &name : p.funcTable) {
    int idx = p.funcIdx(name);
    if (idx < 0)
      throw ValidationError(0, "funcTable entry '" + name + "' not found");
    p.funcTableIdx.push_back(idx);
  }

  // Block indices and slot discovery.
  std::vector<std::vector<SlotInfo>> slotInfo(p.functions.size());
  for (auto &f : p.functions) {
    f.blockIndex.clear();
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      auto &blk = f.blocks[b];
      if (f.blockIndex.count(blk.label))
        throw ValidationError(blk.line, "duplicate block label '" + blk.label +
                                            "' in '" + f.name + "'");
      f.blockIndex[blk.label] = static_cast<int>(b);
    }
    f.entryIdx = f.blockIdx(f.entryBlock);
    if (f.entryIdx < 0)
      throw ValidationError(f.line, "entry block '" + f.entryBlock +
                                        "' not found in '" + f.name + "'");

    f.regSlot.clear();
    auto &slots = slotInfo[p.funcIdx(f.name)];
    auto slotOf = [&](const std::string &name) {
      auto it = f.regSlot.find(name);
      if (it != f.regSlot.end()) return it->second;
      int32_t s = static_cast<int32_t>(slots.size());
      f.regSlot[name] = s;
      slots.emplace_back();
      return s;
    };
    for (auto &prm : f.params) {
      if (f.regSlot.count(prm.name))
        throw ValidationError(f.line, "duplicate parameter '" + prm.name + "'");
      slots[slotOf(prm.name)].width = prm.width;
    }
    // Array allocations first: loads need the element width.
    for (auto &blk : f.blocks)
      for (auto &ins : blk.instrs)
        if (ins.op == Op::ArrAlloc) {
          if (ins.dest.empty())
            throw ValidationError(ins.line, "arr.alloc needs a destination");
          if (ins.aux == 0 || ins.aux > (1u << 20))
            throw ValidationError(ins.line, "arr.alloc size must be in [1, 2^20]");
          int32_t s = slotOf(ins.dest);
          auto &si = slots[s];
          if (si.width != 0 || (si.isArray && si.arraySize != 0))
            throw ValidationError(ins.line, "array register '" + ins.dest +
                                                "' redefined");
          si.isArray = true;
          si.elemWidth = ins.width;
          si.arraySize = static_cast<int>(ins.aux);
        }
    for (auto &blk : f.blocks)
      for (auto &ins : blk.instrs) {
        if (ins.op == Op::ArrAlloc) continue;
        if (ins.dest.empty()) continue;
        int32_t s = slotOf(ins.dest);
        if (slots[s].isArray)
          throw ValidationError(ins.line, "register '" + ins.dest +
                                              "' already holds an array");
      }
  }

  // Fixpoint over call result widths / function return widths.
  auto setWidth = [&](Function &f, std::vector<SlotInfo> &slots,
                      const std::string &reg, Width w, int line) {
    int32_t s = f.regSlot.at(reg);
    auto &si = slots[s];
    if (si.isArray)
      throw ValidationError(line, "register '" + reg + "' already holds an array");
    if (si.width == 0) si.width = w;
    else if (si.width != w)
      throw ValidationError(line, "register '" + reg + "' width mismatch (" +
                                      std::to_string(si.width) + " vs " +
                                      std::to_string(w) + ")");
  };

  bool changed = true;
  int guard = 0;
  while (changed) {
    if (++guard > 64)
      throw ValidationError(0, "cannot infer call/return widths (cyclic)");
    changed = false;
    for (auto &f : p.functions) {
      auto &slots = slotInfo[p.funcIdx(f.name)];
      for (auto &blk : f.blocks)
        for (auto &ins : blk.instrs) {
          Width w = 0;
          switch (ins.op) {
          case Op::Const:
          case Op::In:
          case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Rem:
          case Op::Shl: case Op::Lshr: case Op::Ashr:
          case Op::And: case Op::Or: case Op::Xor:
          case Op::Zext: case Op::Sext: case Op::Trunc:
          case Op::Cmp:
          case Op::Icall:
            w = ins.width;
            break;
          case Op::ArrLoad: {
            if (ins.args.empty() || ins.args[0].isImm) break;
            auto it = f.regSlot.find(ins.args[0].reg);
            if (it != f.regSlot.end() && slots[it->second].isArray)
              w = slots[it->second].elemWidth;
            break;
          }
          case Op::Call: {
            int ci = p.funcIdx(ins.callee);
            if (ci >= 0) w = p.functions[ci].retWidth;
            break;
          }
          case Op::ArrAlloc:
          case Op::ArrStore:
            break;
          }
          if (!ins.dest.empty() && w != 0 &&
              slots[f.regSlot.at(ins.dest)].width == 0) {
            setWidth(f, slots, ins.dest, w, ins.line);
            changed = true;
          }
        }
      // Return width from ret operands.
      if (f.retWidth == 0) {
        for (auto &blk : f.blocks) {
          if (blk.term.kind != Terminator::Kind::Ret || !blk.term.retVal)
            continue;
          const Operand &rv = *blk.term.retVal;
          Width w = rv.isImm ? 32 : operandWidth(f, slots, rv);
          if (w != 0) {
            f.retWidth = w;
            changed = true;
            break;
          }
        }
      }
    }
  }

  // Full per-instruction checking and slot resolution.
  for (auto &f : p.functions) {
    auto &slots = slotInfo[p.funcIdx(f.name)];
    auto resolve = [&](Operand &o, int line) -> Width {
      if (o.isImm) return 0;
      auto it = f.regSlot.find(o.reg);
      if (it == f.regSlot.end())
        throw ValidationError(line, "unknown register '" + o.reg + "'");
      o.slot = it->second;
      if (slots[o.slot].isArray)
        throw ValidationError(line, "array register '" + o.reg +
                                        "' used as a value");
      if (slots[o.slot].width == 0)
        throw ValidationError(line, "register '" + o.reg + "' has no defined width");
      return slots[o.slot].width;
    };
    auto resolveArray = [&](Operand &o, int line) -> int32_t {
      if (o.isImm)
        throw ValidationError(line, "expected an array register");
      auto it = f.regSlot.find(o.reg);
      if (it == f.regSlot.end() || !slots[it->second].isArray)
        throw ValidationError(line, "'" + o.reg + "' is not an array register");
      o.slot = it->second;
      return o.slot;
    };
    auto wantArgs = [&](Instr &ins, size_t n) {
      if (ins.args.size() != n)
        throw ValidationError(ins.line, std::string(opName(ins.op)) +
                                            " expects " + std::to_string(n) +
                                            " operands");
    };
    auto sameWidth = [&](Instr &ins, Width want) {
      for (auto &a : ins.args) {
        Width w = resolve(a, ins.line);
        if (w != 0 && w != want)
          throw ValidationError(ins.line, std::string(opName(ins.op)) +
                                              " operand width mismatch");
      }
    };

    for (auto &blk : f.blocks) {
      for (auto &ins : blk.instrs) {
        switch (ins.op) {
        case Op::Const:
          break;
        case Op::In:
          if (ins.aux + ins.width / 8 > p.inputLen)
            throw ValidationError(ins.line, "input read past inputLen");
          break;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Rem:
        case Op::Shl: case Op::Lshr: case Op::Ashr:
          wantArgs(ins, 2);
          sameWidth(ins, ins.width);
          break;
        case Op::And: case Op::Or: case Op::Xor:
          wantArgs(ins, 2);
          sameWidth(ins, ins.width);
          break;
        case Op::Zext: case Op::Sext: {
          wantArgs(ins, 1);
          Width sw = resolve(ins.args[0], ins.line);
          if (ins.args[0].isImm)
            throw ValidationError(ins.line, "conversion needs a register operand");
          if (sw >= ins.width)
            throw ValidationError(ins.line, "extension must widen");
          break;
        }
        case Op::Trunc: {
          wantArgs(ins, 1);
          Width sw = resolve(ins.args[0], ins.line);
          if (ins.args[0].isImm)
            throw ValidationError(ins.line, "conversion needs a register operand");
          if (sw <= ins.width)
            throw ValidationError(ins.line, "truncation must narrow");
          break;
        }
        case Op::Cmp: {
          wantArgs(ins, 2);
          Width a = resolve(ins.args[0], ins.line);
          Width b = resolve(ins.args[1], ins.line);
          if (a != 0 && b != 0 && a != b)
            throw ValidationError(ins.line, "cmp operand width mismatch");
          if (a == 0 && b == 0)
            throw ValidationError(ins.line, "cmp needs at least one register");
          break;
        }
        case Op::ArrAlloc:
          break;
        case Op::ArrLoad:
          wantArgs(ins, 2);
          resolveArray(ins.args[0], ins.line);
          resolve(ins.args[1], ins.line);
          break;
        case Op::ArrStore: {
          wantArgs(ins, 3);
          int32_t as = resolveArray(ins.args[0], ins.line);
          resolve(ins.args[1], ins.line);
          Width vw = resolve(ins.args[2], ins.line);
          if (vw != 0 && vw != slots[as].elemWidth)
            throw ValidationError(ins.line, "arr.store value width mismatch");
          break;
        }
        case Op::Call: {
          ins.calleeIdx = p.funcIdx(ins.callee);
          if (ins.calleeIdx < 0)
            throw ValidationError(ins.line, "unknown function '" + ins.callee + "'");
          auto &callee = p.functions[ins.calleeIdx];
          if (ins.args.size() != callee.params.size())
            throw ValidationError(ins.line, "call to '" + ins.callee +
                                                "' has wrong arity");
          for (size_t i = 0; i < ins.args.size(); ++i) {
            Width w = resolve(ins.args[i], ins.line);
            if (w != 0 && w != callee.params[i].width)
              throw ValidationError(ins.line, "call argument width mismatch");
          }
          if (!ins.dest.empty() && callee.retWidth == 0)
            throw ValidationError(ins.line, "'" + ins.callee +
                                                "' returns no value");
          break;
        }
        case Op::Icall:
          for (auto &a : ins.args) resolve(a, ins.line);
          if (ins.args[0].isImm && ins.args[0].imm >= p.funcTable.size() &&
              !p.funcTable.empty()) {
            // constant index out of table range is legal; it records at runtime
          }
          break;
        }
        if (!ins.dest.empty() && ins.op != Op::ArrAlloc) {
          auto &si = slots[f.regSlot.at(ins.dest)];
          Width w = ins.op == Op::Call
                        ? p.functions[ins.calleeIdx].retWidth
                        : (ins.op == Op::ArrLoad
                               ? slots[ins.args[0].slot].elemWidth
                               : ins.width);
          if (si.width == 0) si.width = w;
          if (si.width != w)
            throw ValidationError(ins.line, "register '" + ins.dest +
                                                "' width mismatch");
          ins.destSlot = f.regSlot.at(ins.dest);
        } else if (!ins.dest.empty()) {
          ins.destSlot = f.regSlot.at(ins.dest);
        }
      }

      // Terminator checks.
      auto &t = blk.term;
      switch (t.kind) {
      case Terminator::Kind::Jmp:
        t.thenIdx = f.blockIdx(t.target0);
        if (t.thenIdx < 0)
          throw ValidationError(t.line, "unknown block '" + t.target0 + "'");
        break;
      case Terminator::Kind::Br: {
        if (t.cond.isImm)
          throw ValidationError(t.line, "br condition must be a register");
        Width w = resolve(t.cond, t.line);
        if (w != 1)
          throw ValidationError(t.line, "br condition must have width 1");
        t.thenIdx = f.blockIdx(t.target0);
        t.elseIdx = f.blockIdx(t.target1);
        if (t.thenIdx < 0 || t.elseIdx < 0)
          throw ValidationError(t.line, "unknown branch target");
        break;
      }
      case Terminator::Kind::Ret:
        if (t.retVal) {
          Width w = resolve(*t.retVal, t.line);
          if (f.retWidth == 0) f.retWidth = w == 0 ? 32 : w;
          if (w != 0 && w != f.retWidth)
            throw ValidationError(t.line, "ret width mismatch");
        } else if (f.retWidth != 0) {
          throw ValidationError(t.line, "function '" + f.name +
                                            "' must return a value");
        }
        break;
      }
    }

    f.numSlots = static_cast<int>(slots.size());
    f.slotWidth.assign(slots.size(), 0);
    f.slotArraySize.assign(slots.size(), 0);
    f.slotElemWidth.assign(slots.size(), 0);
    f.slotName.assign(slots.size(), "");
    for (auto &[name, s] : f.regSlot) f.slotName[s] = name;
    for (size_t s = 0; s < slots.size(); ++s) {
      f.slotWidth[s] = slots[s].width;
      f.slotArraySize[s] = slots[s].arraySize;
      f.slotElemWidth[s] = slots[s].elemWidth;
    }
  }

  // Assigned-before-use along every path (must-assign dataflow).
  for (auto &f : p.functions) {
    size_t nb = f.blocks.size();
    size_t ns = static_cast<size_t>(f.numSlots);
    // Greatest-fixpoint must-assign analysis: start from all-assigned and
    // intersect downward.
    std::vector<std::vector<bool>> in(nb, std::vector<bool>(ns, true));
    std::vector<std::vector<bool>> out(nb, std::vector<bool>(ns, true));
    std::vector<bool> entryIn(ns, false);
    for (auto &prm : f.params) entryIn[f.regSlot.at(prm.name)] = true;

    std::vector<std::vector<int>> preds(nb);
    for (size_t b = 0; b < nb; ++b) {
      auto &t = f.blocks[b].term;
      if (t.kind == Terminator::Kind::Jmp) preds[t.thenIdx].push_back(b);
      else if (t.kind == Terminator::Kind::Br) {
        preds[t.thenIdx].push_back(b);
        preds[t.elseIdx].push_back(b);
      }
    }
    auto transfer = [&](size_t b, std::vector<bool> base) {
      for (auto &ins : f.blocks[b].instrs)
        if (ins.destSlot >= 0) base[ins.destSlot] = true;
      return base;
    };
    bool change = true;
    while (change) {
      change = false;
      for (size_t b = 0; b < nb; ++b) {
        std::vector<bool> newIn =
            b == static_cast<size_t>(f.entryIdx) ? entryIn
                                                 : std::vector<bool>(ns, true);
        if (b != static_cast<size_t>(f.entryIdx)) {
          // Unreachable blocks keep the all-true top and are never checked.
          for (int pr : preds[b])
            for (size_t s = 0; s < ns; ++s)
              newIn[s] = newIn[s] && out[pr][s];
        }
        auto newOut = transfer(b, newIn);
        if (newIn != in[b] || newOut != out[b]) {
          in[b] = std::move(newIn);
          out[b] = std::move(newOut);
          change = true;
        }
      }
    }
    for (size_t b = 0; b < nb; ++b) {
      auto live = in[b];
      auto useCheck = [&](const Operand &o, int line) {
        if (o.isImm || o.slot < 0) return;
        if (!live[o.slot])
          throw ValidationError(line, "register '" + o.reg +
                                          "' may be used before assignment");
      };
      for (auto &ins : f.blocks[b].instrs) {
        for (auto &a : ins.args) useCheck(a, ins.line);
        if (ins.destSlot >= 0) live[ins.destSlot] = true;
      }
      auto &t = f.blocks[b].term;
      if (t.kind == Terminator::Kind::Br) useCheck(t.cond, t.line);
      if (t.kind == Terminator::Kind::Ret && t.retVal) useCheck(*t.retVal, t.line);
    }
  }

  // Dense node ids.
  p.nodeBase.clear();
  NodeId next = 0;
  for (auto &f : p.functions) {
    p.nodeBase.push_back(next);
    next += static_cast<NodeId>(f.blocks.size());
  }
  p.numNodes = next;
}

namespace {

std::string fmtImm(uint64_t v) {
  std::ostringstream os;
  if (v > 9) os << "0x" << std::hex << v;
  else os << v;
  return os.str();
}

std::string fmtOperand(const Operand &o) {
  return o.isImm ? fmtImm(o.imm) : o.reg;
}

} // namespace

std::string printProgram(const Program &p) {
  std::ostringstream os;
  os << "input " << p.inputLen << "\n";
  os << "entry " << p.entry << "\n";
  if (!p.funcTable.empty()) {
    os << "table ";
    for (size_t i = 0; i < p.funcTable.size(); ++i)
      os << (i ? ", " : "") << p.funcTable[i];
    os << "\n";
  }
  for (auto &f : p.functions) {
    os << "func " << f.name << "(";
    for (auto &prm : f.params)
      os << prm.name << ":" << int(prm.width) << ", ";
    os << "entry=" << f.entryBlock << ") {\n";
    for (auto &blk : f.blocks) {
      os << blk.label << ":\n";
      for (auto &ins : blk.instrs) {
        os << "  ";
        if (!ins.dest.empty()) os << ins.dest << " = ";
        switch (ins.op) {
        case Op::Const:
          os << "const." << (ins.isSigned ? 's' : 'u') << int(ins.width) << " "
             << fmtImm(ins.aux);
          break;
        case Op::In:
          os << "in.u" << int(ins.width) << " " << ins.aux;
          break;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Rem:
          os << opName(ins.op) << "." << (ins.isSigned ? 's' : 'u')
             << int(ins.width) << " " << fmtOperand(ins.args[0]) << ", "
             << fmtOperand(ins.args[1]);
          break;
        case Op::Shl: case Op::Lshr: case Op::Ashr:
        case Op::And: case Op::Or: case Op::Xor:
          os << opName(ins.op) << "." << int(ins.width) << " "
             << fmtOperand(ins.args[0]) << ", " << fmtOperand(ins.args[1]);
          break;
        case Op::Zext: case Op::Sext: case Op::Trunc:
          os << opName(ins.op) << "." << int(ins.width) << " "
             << fmtOperand(ins.args[0]);
          break;
        case Op::Cmp:
          os << "cmp." << cmpName(ins.cmp) << " " << fmtOperand(ins.args[0])
             << ", " << fmtOperand(ins.args[1]);
          break;
        case Op::ArrAlloc:
          os << "arr.alloc." << int(ins.width) << " " << ins.aux;
          break;
        case Op::ArrLoad:
          os << "arr.load " << fmtOperand(ins.args[0]) << ", "
             << fmtOperand(ins.args[1]);
          break;
        case Op::ArrStore:
          os << "arr.store " << fmtOperand(ins.args[0]) << ", "
             << fmtOperand(ins.args[1]) << ", " << fmtOperand(ins.args[2]);
          break;
        case Op::Call:
          os << "call " << ins.callee;
          for (auto &a : ins.args) os << ", " << fmtOperand(a);
          break;
        case Op::Icall:
          os << "icall." << int(ins.width);
          for (size_t i = 0; i < ins.args.size(); ++i)
            os << (i ? ", " : " ") << fmtOperand(ins.args[i]);
          break;
        }
        os << "\n";
      }
      auto &t = blk.term;
      os << "  ";
      switch (t.kind) {
      case Terminator::Kind::Jmp:
        os << "jmp " << t.target0;
        break;
      case Terminator::Kind::Br:
        os << "br " << fmtOperand(t.cond) << ", " << t.target0 << ", "
           << t.target1;
        break;
      case Terminator::Kind::Ret:
        os << "ret";
        if (t.retVal) os << " " << fmtOperand(*t.retVal);
        break;
      }
      os << "\n";
    }
    os << "}\n";
  }
  return os.str();
}

} // namespace hfl
