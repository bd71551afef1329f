#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gainpath/errors.h"
#include "gainpath/lyapunov.h"
#include "gainpath/network.h"
#include "gainpath/path.h"
#include "gainpath/stability.h"

namespace gainpath {

/// A network file that parsed but failed validate_network.
class InvalidNetworkError : public Error {
 public:
  InvalidNetworkError(ValidationReport report, const std::string& what)
      : Error(what), report_(std::move(report)) {}

  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct NetworkDocument {
  NetworkSpec spec;
  /// Present when the file has a `dynamics` block.
  std::optional<std::vector<SubsystemModel>> dynamics;
  bool templated = false;
};

/// Parses network JSON (schema version 1). Templates are expanded at
/// `truncation` (or the template size). Throws ParseError naming the line and
/// column of a syntax error or the JSON path of a bad field.
NetworkDocument parse_network(const std::string& text,
                              std::optional<std::size_t> truncation = std::nullopt);

/// Reads and parses a file, then runs validate_network. Throws ParseError
/// for unreadable or malformed files and InvalidNetworkError when validation
/// fails.
NetworkDocument load_network(const std::string& path,
                             std::optional<std::size_t> truncation = std::nullopt);

/// Explicit-node JSON for a spec (templates are written expanded).
std::string serialize_network(const NetworkSpec& spec,
                              const std::optional<std::vector<SubsystemModel>>& dynamics =
                                  std::nullopt);

/// Parses "kind:params", e.g. "linear:0.5", "power:0.5,2", "identity",
/// "piecewise-linear:0,0;1,2;3,3". Throws ParseError.
ScalarFn parse_function_flag(const std::string& text);

/// Parses "a:b:points" into log-spaced levels. Throws ParseError.
std::vector<double> parse_grid_flag(const std::string& text);

/// Parses "n[,n2,...]". Throws ParseError.
std::vector<std::size_t> parse_truncation_flag(const std::string& text);

/// CSV with header r,component,sigma, components 1-based, 17 significant digits.
std::string path_table_csv(const PathTable& table);

/// {property, verdict, witness?, estimate?, budget, seed, notes}. Indices
/// in the witness are 1-based.
std::string certificate_json(const Certificate& cert, int indent = 2);

/// Shortest round-trip decimal with 17 significant digits.
std::string format_double(double v);

}  // namespace gainpath
