#include "netlock/verilog.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace netlock {

namespace {

constexpr std::array kKeywords = {
    "always",   "and",      "assign",   "begin",   "buf",      "case",     "default", "else",
    "end",      "endcase",  "endmodule", "for",    "function", "if",       "initial", "inout",
    "input",    "integer",  "module",   "nand",    "negedge",  "nor",      "not",     "or",
    "output",   "parameter", "posedge", "reg",     "signed",   "supply0",  "supply1", "tri",
    "wire",     "xnor",     "xor",      "generate", "genvar",  "localparam", "task",  "wand",
    "wor",      "real",     "time",     "event",   "force",    "release",  "repeat",  "while",
    "forever",  "fork",     "join",     "wait",    "specify",  "endspecify",
};

bool is_keyword(std::string_view s) {
  for (auto k : kKeywords)
    if (s == k) return true;
  return false;
}

class Namer {
 public:
  std::string claim(std::string_view raw) {
    std::string s;
    s.reserve(raw.size() + 2);
    for (char c : raw) s.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_');
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_') || is_keyword(s)) {
      s = "n_" + s;
    }
    std::string candidate = s;
    for (std::size_t k = 1; used_.contains(candidate); ++k) candidate = s + "_" + std::to_string(k);
    used_.insert(candidate);
    return candidate;
  }

 private:
  std::unordered_set<std::string> used_;
};

}  // namespace

std::string emit_verilog(const Netlist& n) {
  // module names live in their own namespace
  const std::string module = Namer{}.claim(n.name().empty() ? "top" : n.name());
  Namer namer;

  std::vector<std::string> sig(n.signal_count());
  for (SignalId s = 0; s < n.signal_count(); ++s) sig[s] = namer.claim(n.signal_name(s));

  // Outputs that are inputs need a distinct port name.
  std::vector<std::string> out_port(n.primary_outputs().size());
  for (std::size_t i = 0; i < out_port.size(); ++i) {
    SignalId s = n.output_ids()[i];
    out_port[i] = s < n.input_count() ? namer.claim(n.signal_name(s) + "_out") : sig[s];
  }

  std::ostringstream os;
  os << "module " << module << " (";
  bool first = true;
  auto port = [&](const std::string& p) {
    os << (first ? "" : ", ") << p;
    first = false;
  };
  for (SignalId s = 0; s < n.input_count(); ++s) port(sig[s]);
  for (const auto& p : out_port) port(p);
  os << ");\n";

  for (SignalId s = 0; s < n.primary_inputs().size(); ++s) os << "  input " << sig[s] << ";\n";
  for (SignalId s = static_cast<SignalId>(n.primary_inputs().size()); s < n.input_count(); ++s) {
    os << "  input " << sig[s] << ";\n";
  }
  for (const auto& p : out_port) os << "  output " << p << ";\n";
  for (std::size_t g = 0; g < n.gate_count(); ++g) {
    SignalId s = n.gate_output(g);
    if (!n.is_output(s)) os << "  wire " << sig[s] << ";\n";
  }

  for (std::size_t g = 0; g < n.gate_count(); ++g) {
    const auto& gate = n.gates()[g];
    auto fin = n.gate_fanin(g);
    auto join = [&](const char* op) {
      std::string e;
      for (std::size_t i = 0; i < fin.size(); ++i) {
        if (i) e += std::string(" ") + op + " ";
        e += sig[fin[i]];
      }
      return e;
    };
    std::string rhs;
    switch (gate.kind) {
      case GateKind::And: rhs = join("&"); break;
      case GateKind::Or: rhs = join("|"); break;
      case GateKind::Xor: rhs = join("^"); break;
      case GateKind::Nand: rhs = "~(" + join("&") + ")"; break;
      case GateKind::Nor: rhs = "~(" + join("|") + ")"; break;
      case GateKind::Xnor: rhs = "~(" + join("^") + ")"; break;
      case GateKind::Not: rhs = "~" + sig[fin[0]]; break;
      case GateKind::Buff: rhs = sig[fin[0]]; break;
    }
    os << "  assign " << sig[n.gate_output(g)] << " = " << rhs << ";\n";
  }
  for (std::size_t i = 0; i < out_port.size(); ++i) {
    SignalId s = n.output_ids()[i];
    if (s < n.input_count()) os << "  assign " << out_port[i] << " = " << sig[s] << ";\n";
  }
  os << "endmodule\n";
  return os.str();
}

}  // namespace netlock
