// ISCAS `.bench` reader/writer.
//
// Grammar (line oriented, `#` starts a comment anywhere on a line):
//   INPUT(<id>) | OUTPUT(<id>) | <id> = <KIND>(<id>{, <id>})
// Inputs named `keyinput<N>` are key inputs ordered by N. A comment of the
// form `# key=<bits>` carries the correct key (character i = key bit i).

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "netlock/netlist.hpp"

namespace netlock {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

inline constexpr std::string_view kKeyInputPrefix = "keyinput";

/// Syntax problems raise ParseError; structural problems (duplicate driver,
/// undeclared signal, cycle, key width) raise NetlistError.
Netlist parse_bench(std::string_view text, std::string name = "top");
Netlist read_bench_file(const std::filesystem::path& path);

std::string write_bench(const Netlist& netlist);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace netlock
