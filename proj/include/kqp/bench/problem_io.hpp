#ifndef KQP_BENCH_PROBLEM_IO_HPP
#define KQP_BENCH_PROBLEM_IO_HPP

#include "kqp/qp_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace kqp::bench {

// JSON instance format: {n, m, m1, m2, c, b, P, A} with P and A given as
// {nrows, ncols, colptr, rowind, nzval}, 0-based, P upper triangle only.

nlohmann::ordered_json to_json(const QpProblemd& prob);
QpProblemd problem_from_json(const nlohmann::json& doc);

/// Serialized bytes; doubles use the shortest round-trip decimal form.
std::string dump_problem(const QpProblemd& prob);

void write_problem(const std::filesystem::path& path, const QpProblemd& prob);
QpProblemd read_problem(const std::filesystem::path& path);

}  // namespace kqp::bench

#endif  // KQP_BENCH_PROBLEM_IO_HPP
