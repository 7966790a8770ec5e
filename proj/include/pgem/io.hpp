#ifndef PGEM_IO_HPP
#define PGEM_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "pgem/em.hpp"
#include "pgem/model.hpp"
#include "pgem/multinomial.hpp"
#include "pgem/sparse.hpp"

namespace pgem {

// Binary/count CSV: header "y,m,x1,...,xd".  Malformed rows and y > m are
// rejected with the offending line number.
Dataset read_dataset_csv(const std::string& path);

// Multinomial CSV: header "y,x1,...,xd" with integer classes y in 1..K.
MultiDataset read_multi_csv(const std::string& path);

// Floats written with 17 significant digits so ingest round-trips bit-exactly.
void write_dataset_csv(const std::string& path, const Dataset& data);
void write_vector_csv(const std::string& path, const Vector& v,
                      const std::string& column = "beta");

std::string format_g17(double x);

// JSON fit report: beta_hat, stddevs, symmetric 95% intervals
// (estimate +/- 1.96 stddev), trace, and the config/seed that produced it.
void emit_report(const FitReport& report, const std::string& path,
                 const nlohmann::json& config);

nlohmann::json report_to_json(const FitReport& report,
                              const nlohmann::json& config);

// Path table CSV: lambda, objective, nnz, beta_1..beta_d per row.
void write_path_csv(const std::string& path, const PathResult& result);

}  // namespace pgem

#endif
