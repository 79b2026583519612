#pragma once

#include <string>

#include "netlock/netlist.hpp"

namespace netlock {

/// Structural Verilog-2001: one module, continuous assigns only.
///
/// Identifiers are sanitized deterministically: characters outside
/// [A-Za-z0-9_] become `_`, names not starting with a letter or `_` (and
/// Verilog keywords) get an `n_` prefix, and collisions are resolved with
/// `_<k>` suffixes in signal declaration order. An output that is also an
/// input gets its own port driven by an assign.
std::string emit_verilog(const Netlist& netlist);

}  // namespace netlock
