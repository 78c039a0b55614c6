#pragma once

// CSV tables with '#'-prefixed metadata headers, numeric matrix files and
// JSON (de)serialization of models and training reports. Numeric output uses
// 17 significant digits so re-reading and re-serializing is byte-identical.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ssmlab/common.hpp"
#include "ssmlab/ssm.hpp"
#include "ssmlab/trainer.hpp"

namespace ssmlab {

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace csv {

/// A CSV file: metadata lines (# key=value), a header row, string cells.
struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_metadata(const std::string& key, const std::string& value) {
    metadata.emplace_back(key, value);
  }
  void add_row(const std::vector<double>& values) {
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) row.push_back(format_double(v));
    rows.push_back(std::move(row));
  }
  std::vector<double> row_values(std::size_t i) const {
    std::vector<double> out;
    out.reserve(rows[i].size());
    for (const auto& cell : rows[i]) out.push_back(std::stod(cell));
    return out;
  }
  Index column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<Index>(i);
    }
    throw std::invalid_argument("csv: no column named " + name);
  }
};

inline std::string serialize(const Table& table) {
  std::ostringstream out;
  for (const auto& [key, value] : table.metadata) out << "# " << key << "=" << value << "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ",";
    out << table.header[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << row[i];
    }
    out << "\n";
  }
  return out.str();
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline Table parse(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body = body.substr(1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        table.add_metadata(body, "");
      } else {
        table.add_metadata(body.substr(0, eq), body.substr(eq + 1));
      }
      continue;
    }
    if (!have_header) {
      table.header = split_line(line);
      have_header = true;
    } else {
      table.rows.push_back(split_line(line));
    }
  }
  return table;
}

inline void write_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize(table);
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

} // namespace csv

/// Numeric matrix CSV: metadata, a "rows,cols" header, then one CSV line per
/// row.
inline csv::Table matrix_to_table(const Eigen::MatrixXd& m) {
  csv::Table table;
  table.header = {std::to_string(m.rows()), std::to_string(m.cols())};
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    table.add_row(row);
  }
  return table;
}

inline Eigen::MatrixXd table_to_matrix(const csv::Table& table) {
  require(table.header.size() == 2, "matrix csv: header must be rows,cols");
  const Index rows = std::stoll(table.header[0]);
  const Index cols = std::stoll(table.header[1]);
  require(static_cast<Index>(table.rows.size()) == rows, "matrix csv: row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto vals = table.row_values(i);
    require(static_cast<Index>(vals.size()) == cols, "matrix csv: column count mismatch");
    for (Index j = 0; j < cols; ++j) m(i, j) = vals[j];
  }
  return m;
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                             std::vector<std::pair<std::string, std::string>> metadata = {}) {
  csv::Table table = matrix_to_table(m);
  table.metadata = std::move(metadata);
  csv::write_file(path, table);
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  return table_to_matrix(csv::read_file(path));
}

inline nlohmann::json model_to_json(const SsmModel& model) {
  nlohmann::json j;
  j["real"] = std::vector<double>(model.w.real.data(), model.w.real.data() + model.w.real.size());
  j["imag"] = std::vector<double>(model.w.imag.data(), model.w.imag.data() + model.w.imag.size());
  std::vector<double> c_re(model.c.size()), c_im(model.c.size());
  for (Index i = 0; i < model.c.size(); ++i) {
    c_re[i] = model.c[i].real();
    c_im[i] = model.c[i].imag();
  }
  j["c_real"] = c_re;
  j["c_imag"] = c_im;
  j["delta"] = model.delta;
  return j;
}

inline SsmModel model_from_json(const nlohmann::json& j) {
  SsmModel model;
  const auto real = j.at("real").get<std::vector<double>>();
  const auto imag = j.at("imag").get<std::vector<double>>();
  const auto c_re = j.at("c_real").get<std::vector<double>>();
  const auto c_im = j.at("c_imag").get<std::vector<double>>();
  require(real.size() == imag.size() && real.size() == c_re.size() && real.size() == c_im.size(),
          "model json: inconsistent lengths");
  const Index m = static_cast<Index>(real.size());
  model.w.real = Eigen::Map<const Eigen::VectorXd>(real.data(), m);
  model.w.imag = Eigen::Map<const Eigen::VectorXd>(imag.data(), m);
  model.c.resize(m);
  for (Index i = 0; i < m; ++i) model.c[i] = Complex(c_re[i], c_im[i]);
  model.delta = j.at("delta").get<double>();
  model.validate();
  return model;
}

inline nlohmann::json train_report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["loss_train"] = report.loss_train;
  j["loss_test"] = report.loss_test;
  j["eval_steps"] = report.eval_steps;
  j["kernel"] =
      std::vector<double>(report.kernel.data(), report.kernel.data() + report.kernel.size());
  j["re_nonneg_ratio"] = report.re_nonneg_ratio;
  j["diverged"] = report.diverged;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace ssmlab
