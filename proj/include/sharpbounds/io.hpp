#pragma once

// Numeric CSV input and %.17g output with "inf"/"-inf" for infinities.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "sharpbounds/core_bounds.hpp"

namespace sharpbounds {

struct CsvTable {
  std::vector<std::string> header;
  MatrixXd data;  // rows x columns

  Index rows() const { return data.rows(); }
  bool has_column(const std::string& name) const;
  /// Throws kColumn naming the missing column.
  VectorXd column(const std::string& name) const;
  /// Columns whose names start with `prefix`, in file order.
  std::vector<std::string> columns_with_prefix(const std::string& prefix) const;
};

/// Parses a header line and numeric rows. Malformed rows throw kParse with
/// the 1-based data row and line number.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// %.17g; infinities as "inf"/"-inf" and NaN as "nan".
std::string format_number(double value);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace sharpbounds
