#include "netlock/bench_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace netlock {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  std::size_t column() const { return pos_ + 1; }

  std::string_view identifier(const char* what) {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    if (start == pos_) fail(std::string("expected ") + what);
    return text_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of line";
    throw ParseError(line_, column(), msg + ", found " + found);
  }

  [[noreturn]] void fail_at(std::size_t column, const std::string& msg) const {
    throw ParseError(line_, column, msg);
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

// `# key=0101` header comment; returns the bit string when the comment matches.
std::optional<std::string_view> key_comment(std::string_view comment) {
  auto body = comment.substr(1);
  while (!body.empty() && std::isspace(static_cast<unsigned char>(body.front()))) body.remove_prefix(1);
  if (!body.starts_with("key=")) return std::nullopt;
  body.remove_prefix(4);
  while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.remove_suffix(1);
  return body;
}

}  // namespace

Netlist parse_bench(std::string_view text, std::string name) {
  NetlistData data;
  data.name = std::move(name);
  // key bit index -> name
  std::map<std::uint64_t, std::string> keys;
  std::optional<std::string> key_bits;
  std::size_t key_line = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      if (auto bits = key_comment(line.substr(hash))) {
        if (key_bits) throw ParseError(line_no, hash + 1, "duplicate key comment");
        for (std::size_t i = 0; i < bits->size(); ++i) {
          if ((*bits)[i] != '0' && (*bits)[i] != '1') {
            throw ParseError(line_no, hash + 1, "key comment may only contain 0 and 1");
          }
        }
        key_bits = std::string(*bits);
        key_line = line_no;
      }
      line = line.substr(0, hash);
    }

    LineCursor cur(line, line_no);
    if (cur.at_end()) continue;
    const std::size_t head_col = cur.column();
    auto head = cur.identifier("identifier");

    if ((iequals(head, "INPUT") || iequals(head, "OUTPUT")) && cur.accept('(')) {
      auto id = std::string(cur.identifier("signal name"));
      cur.expect(')');
      if (!cur.at_end()) cur.fail("unexpected trailing text");
      if (iequals(head, "OUTPUT")) {
        data.primary_outputs.push_back(std::move(id));
      } else if (id.starts_with(kKeyInputPrefix)) {
        auto suffix = std::string_view(id).substr(kKeyInputPrefix.size());
        std::uint64_t index = 0;
        auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), index);
        if (suffix.empty() || ec != std::errc{} || ptr != suffix.data() + suffix.size()) {
          throw ParseError(line_no, head_col, "key input '" + id + "' needs a decimal index suffix");
        }
        if (!keys.emplace(index, id).second) {
          throw ParseError(line_no, head_col, "key input index " + std::to_string(index) + " declared twice");
        }
      } else {
        data.primary_inputs.push_back(std::move(id));
      }
      continue;
    }

    Gate gate;
    gate.output = std::string(head);
    cur.expect('=');
    cur.skip_space();
    const std::size_t kind_col = cur.column();
    auto kind_text = cur.identifier("gate kind");
    auto kind = parse_gate_kind(kind_text);
    if (!kind) cur.fail_at(kind_col, "unknown gate kind '" + std::string(kind_text) + "'");
    gate.kind = *kind;
    cur.expect('(');
    if (!cur.accept(')')) {
      do {
        gate.fanin.emplace_back(cur.identifier("signal name"));
      } while (cur.accept(','));
      cur.expect(')');
    }
    if (!cur.at_end()) cur.fail("unexpected trailing text");
    data.gates.push_back(std::move(gate));
  }

  for (auto& [_, id] : keys) data.key_inputs.push_back(std::move(id));
  if (key_bits) {
    if (key_bits->size() != data.key_inputs.size()) {
      throw ParseError(key_line, 1,
                       "key comment has " + std::to_string(key_bits->size()) + " bits but " +
                           std::to_string(data.key_inputs.size()) + " key inputs are declared");
    }
    data.correct_key = KeyVector::from_string(*key_bits);
  } else if (!data.key_inputs.empty()) {
    throw ParseError(1, 1, "netlist declares key inputs but has no '# key=' comment");
  }
  return Netlist(std::move(data));
}

Netlist read_bench_file(const std::filesystem::path& path) {
  return parse_bench(read_text_file(path), path.stem().string());
}

std::string write_bench(const Netlist& netlist) {
  std::ostringstream os;
  if (const auto& key = netlist.correct_key()) os << "# key=" << key->to_string() << '\n';
  for (const auto& s : netlist.primary_inputs()) os << "INPUT(" << s << ")\n";
  for (const auto& s : netlist.key_inputs()) os << "INPUT(" << s << ")\n";
  for (const auto& s : netlist.primary_outputs()) os << "OUTPUT(" << s << ")\n";
  for (const auto& g : netlist.gates()) {
    os << g.output << " = " << to_string(g.kind) << '(';
    for (std::size_t i = 0; i < g.fanin.size(); ++i) os << (i ? ", " : "") << g.fanin[i];
    os << ")\n";
  }
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace netlock
