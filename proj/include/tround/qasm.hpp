// SPDX-License-Identifier: Apache-2.0
//
// Text format for circuits: an OpenQASM-2 subset with one quantum
// register, the gates h x y z s sdg t tdg cx rz, and rz angles given as
// float literals or rational multiples of pi. Emission is canonical and
// byte-deterministic; parse(emit(c)) reproduces c exactly, including
// parameter bits.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tround/circuit.hpp"

namespace tround::qasm {

struct SourceDiagnostic {
  enum class Severity { error, warning };
  int line = 0;
  int column = 0;
  std::string message;
  Severity severity = Severity::error;
};

struct ParseResult {
  std::optional<Circuit> circuit;
  ParamVector params;
  std::vector<SourceDiagnostic> diagnostics;
  std::string register_name;

  bool ok() const { return circuit.has_value(); }
};

namespace detail {

struct Statement {
  std::string text;
  int line = 1;
  int column = 1;
};

/// Strips // comments and splits on ';', keeping source positions.
inline std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  Statement cur;
  bool started = false;
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size(); ++i, ++col) {
    char c = text[i];
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      c = '\n';
    }
    if (c == '\n') {
      ++line;
      col = 0;  // incremented to 1 by the loop
      if (started) cur.text += ' ';
      continue;
    }
    if (c == ';') {
      if (started) out.push_back(cur);
      cur = Statement{};
      started = false;
      continue;
    }
    if (!started && std::isspace(static_cast<unsigned char>(c))) continue;
    if (!started) {
      started = true;
      cur.line = line;
      cur.column = col;
    }
    cur.text += c;
  }
  if (started) out.push_back(cur);  // trailing text without ';'
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

/// Float literal or [coef*]pi[/den], with an optional leading sign.
inline bool parse_angle_expr(std::string_view s, double& out) {
  s = trim(s);
  double sign = 1.0;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    if (s.front() == '-') sign = -1.0;
    s.remove_prefix(1);
    s = trim(s);
  }
  const std::size_t p = s.find("pi");
  if (p == std::string_view::npos) {
    double v;
    if (!parse_number(s, v)) return false;
    out = sign * v;
    return true;
  }
  double coef = 1.0;
  std::string_view before = trim(s.substr(0, p));
  if (!before.empty()) {
    if (before.back() != '*') return false;
    before.remove_suffix(1);
    if (!parse_number(before, coef)) return false;
  }
  double den = 1.0;
  std::string_view after = trim(s.substr(p + 2));
  if (!after.empty()) {
    if (after.front() != '/') return false;
    after.remove_prefix(1);
    if (!parse_number(after, den) || den == 0.0) return false;
  }
  out = sign * (coef * std::numbers::pi) / den;
  return true;
}

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  bool accept(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string_view ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' || s[pos] == '.'))
      ++pos;
    return s.substr(start, pos - start);
  }
  std::string_view until(char c) {
    std::size_t start = pos;
    int depth = 0;
    while (pos < s.size() && (s[pos] != c || depth > 0)) {
      if (s[pos] == '(') ++depth;
      if (s[pos] == ')') --depth;
      ++pos;
    }
    return s.substr(start, pos - start);
  }
};

}  // namespace detail

/// Parses the supported subset. Parse failures produce diagnostics with
/// line numbers; scanning continues past a bad statement so one pass can
/// report several problems.
inline ParseResult parse(std::string_view text) {
  ParseResult result;
  Circuit circuit(1);
  bool have_qreg = false;
  int qreg_size = 0;
  bool failed = false;

  auto error = [&](const detail::Statement& st, const std::string& msg) {
    result.diagnostics.push_back({st.line, st.column, msg, SourceDiagnostic::Severity::error});
    failed = true;
  };

  static const std::map<std::string, GateKind, std::less<>> kGates = {
      {"h", GateKind::H},     {"x", GateKind::X},   {"y", GateKind::Y},  {"z", GateKind::Z},
      {"s", GateKind::S},     {"sdg", GateKind::Sdg}, {"t", GateKind::T},
      {"tdg", GateKind::Tdg}, {"cx", GateKind::CX}, {"rz", GateKind::Rz}};

  for (const detail::Statement& st : detail::split_statements(text)) {
    detail::Cursor cur{st.text};
    std::string_view head = cur.ident();
    if (head == "OPENQASM" || head == "include") continue;
    if (head.empty()) {
      error(st, "malformed statement");
      continue;
    }
    if (head == "qreg") {
      if (have_qreg) {
        error(st, "only one qreg declaration is supported");
        continue;
      }
      std::string_view name = cur.ident();
      long size = 0;
      bool ok_decl = !name.empty() && cur.accept('[');
      if (ok_decl) {
        std::string_view num = cur.until(']');
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), size);
        ok_decl = ec == std::errc() && p == num.data() + num.size() && cur.accept(']') &&
                  size >= 1 && cur.done();
      }
      if (!ok_decl) {
        error(st, "malformed qreg declaration");
        continue;
      }
      result.register_name = std::string(name);
      qreg_size = static_cast<int>(size);
      circuit = Circuit(qreg_size);
      have_qreg = true;
      continue;
    }
    if (head == "creg" || head == "measure" || head == "barrier" || head == "reset" ||
        head == "gate" || head == "if" || head == "opaque") {
      error(st, "unsupported statement '" + std::string(head) + "'");
      continue;
    }

    auto it = kGates.find(head);
    if (it == kGates.end()) {
      error(st, "unknown gate '" + std::string(head) + "'");
      continue;
    }
    if (!have_qreg) {
      error(st, "gate before qreg declaration");
      continue;
    }
    const GateKind kind = it->second;

    double angle = 0.0;
    if (kind == GateKind::Rz) {
      if (!cur.accept('(')) {
        error(st, "rz requires an angle argument");
        continue;
      }
      std::string_view expr = cur.until(')');
      if (!cur.accept(')') || !detail::parse_angle_expr(expr, angle) || !std::isfinite(angle)) {
        error(st, "malformed angle expression '" + std::string(detail::trim(expr)) + "'");
        continue;
      }
    } else if (cur.accept('(')) {
      error(st, std::string(head) + " takes no parameters");
      continue;
    }

    std::vector<int> operands;
    bool operands_ok = true;
    while (true) {
      std::string_view name = cur.ident();
      long idx = -1;
      bool ok_ref = !name.empty() && name == result.register_name && cur.accept('[');
      if (ok_ref) {
        std::string_view num = cur.until(']');
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
        ok_ref = ec == std::errc() && p == num.data() + num.size() && cur.accept(']');
      }
      if (!ok_ref) {
        error(st, "malformed qubit reference");
        operands_ok = false;
        break;
      }
      if (idx < 0 || idx >= qreg_size) {
        error(st, "qubit index out of range");
        operands_ok = false;
        break;
      }
      operands.push_back(static_cast<int>(idx));
      if (!cur.accept(',')) break;
    }
    if (!operands_ok) continue;
    if (!cur.done()) {
      error(st, "trailing tokens after gate operands");
      continue;
    }

    const std::size_t want = kind == GateKind::CX ? 2 : 1;
    if (operands.size() != want) {
      error(st, std::string(head) + " expects " + std::to_string(want) + " operand(s), got " +
                    std::to_string(operands.size()));
      continue;
    }
    if (kind == GateKind::CX) {
      if (operands[0] == operands[1]) {
        error(st, "cx operands must be distinct");
        continue;
      }
      circuit.add_cx(operands[0], operands[1]);
    } else if (kind == GateKind::Rz) {
      circuit.add_rz(operands[0]);
      result.params.push_back(angle);
    } else {
      circuit.add(kind, operands[0]);
    }
  }

  if (!have_qreg)
    result.diagnostics.push_back({1, 1, "missing qreg declaration",
                                  SourceDiagnostic::Severity::error});
  if (!failed && have_qreg) result.circuit = std::move(circuit);
  return result;
}

namespace detail {

/// Exact rational-pi form k*pi/2^m (m <= 4) when within 1e-12, else 17
/// significant digits (which round-trips doubles exactly). Searching m
/// ascending keeps the fraction reduced.
inline std::string format_angle(double theta) {
  const double pi = std::numbers::pi;
  for (int m = 0; m <= 4; ++m) {
    const double scale = double(1 << m);
    const double ratio = theta * scale / pi;
    if (std::abs(ratio) > 9e15) break;
    const long long k = std::llround(ratio);
    const double candidate = (double(k) * pi) / scale;
    if (std::abs(theta - candidate) <= 1e-12) {
      if (k == 0) return "0";
      std::string s = k < 0 ? "-" : "";
      const long long a = k < 0 ? -k : k;
      if (a != 1) s += std::to_string(a) + "*";
      s += "pi";
      if (m > 0) s += "/" + std::to_string(1 << m);
      return s;
    }
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", theta);
  return buf;
}

}  // namespace detail

/// Canonical emission: header, then one gate per line. Byte-identical
/// for identical inputs.
inline std::string emit(const Circuit& circuit, const ParamVector& params) {
  if (static_cast<int>(params.size()) != circuit.num_params())
    throw std::invalid_argument("emit: parameter count mismatch");
  std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" +
                    std::to_string(circuit.num_qubits()) + "];\n";
  for (const Gate& g : circuit.gates()) {
    out += gate_name(g.kind);
    if (g.kind == GateKind::Rz) out += "(" + detail::format_angle(params[g.param]) + ")";
    out += " q[" + std::to_string(g.q0) + "]";
    if (g.kind == GateKind::CX) out += ",q[" + std::to_string(g.q1) + "]";
    out += ";\n";
  }
  return out;
}

}  // namespace tround::qasm
