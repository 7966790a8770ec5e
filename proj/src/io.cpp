#include "pgem/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pgem {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_field(const std::string& field, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << "CSV line " << line_no << ": bad numeric field '" << field << "'";
    throw std::runtime_error(os.str());
  }
}

std::vector<std::vector<double>> read_rows(const std::string& path,
                                           std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << "CSV line " << line_no << ": expected " << header.size()
         << " fields, got " << fields.size();
      throw std::runtime_error(os.str());
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_field(f, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Dataset read_dataset_csv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, header);
  if (header.size() < 3 || header[0] != "y" || header[1] != "m")
    throw std::runtime_error(path + ": expected header y,m,x1,...,xd");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 2);
  Dataset data;
  data.y.resize(n);
  data.m.resize(n);
  data.X.resize(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t)];
    data.y[t] = row[0];
    data.m[t] = row[1];
    if (data.y[t] > data.m[t] || data.y[t] < 0.0 || data.m[t] <= 0.0) {
      std::ostringstream os;
      os << path << " line " << t + 2 << ": invalid counts y=" << row[0]
         << ", m=" << row[1];
      throw std::runtime_error(os.str());
    }
    for (Eigen::Index j = 0; j < d; ++j)
      data.X(t, j) = row[static_cast<std::size_t>(j) + 2];
  }
  data.validate();
  return data;
}

MultiDataset read_multi_csv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, header);
  if (header.size() < 2 || header[0] != "y")
    throw std::runtime_error(path + ": expected header y,x1,...,xd");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  Eigen::Index K = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const double y = rows[t][0];
    if (y != std::floor(y) || y < 1.0) {
      std::ostringstream os;
      os << path << " line " << t + 2 << ": class label must be an integer >= 1";
      throw std::runtime_error(os.str());
    }
    K = std::max<Eigen::Index>(K, static_cast<Eigen::Index>(y));
  }
  if (K < 2) throw std::runtime_error(path + ": need at least two classes");
  MultiDataset data;
  data.Y = Matrix::Zero(n, K);
  data.X.resize(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t)];
    data.Y(t, static_cast<Eigen::Index>(row[0]) - 1) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j)
      data.X(t, j) = row[static_cast<std::size_t>(j) + 1];
  }
  data.validate();
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "y,m";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << ",x" << j + 1;
  out << "\n";
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    out << format_g17(data.y[t]) << "," << format_g17(data.m[t]);
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      out << "," << format_g17(data.X(t, j));
    out << "\n";
  }
}

void write_vector_csv(const std::string& path, const Vector& v,
                      const std::string& column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << column << "\n";
  for (Eigen::Index j = 0; j < v.size(); ++j) out << format_g17(v[j]) << "\n";
}

nlohmann::json report_to_json(const FitReport& report,
                              const nlohmann::json& config) {
  nlohmann::json j;
  j["algorithm"] = report.algorithm;
  j["converged"] = report.converged;
  j["diverged"] = report.diverged;
  j["iterations"] = report.iterations;
  j["beta_hat"] = std::vector<double>(
      report.beta_hat.data(), report.beta_hat.data() + report.beta_hat.size());
  if (report.cov.size() > 0) {
    std::vector<double> sd, lo, hi;
    for (Eigen::Index k = 0; k < report.beta_hat.size(); ++k) {
      const double s = std::sqrt(report.cov(k, k));
      sd.push_back(s);
      lo.push_back(report.beta_hat[k] - 1.96 * s);
      hi.push_back(report.beta_hat[k] + 1.96 * s);
    }
    j["stddev"] = sd;
    j["ci95_lower"] = lo;
    j["ci95_upper"] = hi;
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& p : report.trace)
    trace.push_back({{"iteration", p.iteration},
                     {"objective", p.objective},
                     {"step_norm", p.step_norm}});
  j["trace"] = trace;
  j["config"] = config;
  return j;
}

void emit_report(const FitReport& report, const std::string& path,
                 const nlohmann::json& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report_to_json(report, config).dump(2) << "\n";
}

void write_path_csv(const std::string& path, const PathResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "lambda,objective,nnz";
  for (Eigen::Index j = 0; j < result.betas.cols(); ++j) out << ",beta" << j + 1;
  out << "\n";
  for (std::size_t g = 0; g < result.lambdas.size(); ++g) {
    out << format_g17(result.lambdas[g]) << ","
        << format_g17(result.objectives[g]) << "," << result.nonzero_counts[g];
    for (Eigen::Index j = 0; j < result.betas.cols(); ++j)
      out << "," << format_g17(result.betas(static_cast<Eigen::Index>(g), j));
    out << "\n";
  }
}

}  // namespace pgem
