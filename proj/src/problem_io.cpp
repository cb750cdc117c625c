#include "kqp/bench/problem_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kqp::bench {
namespace {

nlohmann::ordered_json csc_to_json(const CscMatrixd& a) {
  nlohmann::ordered_json j;
  j["nrows"] = a.nrows();
  j["ncols"] = a.ncols();
  j["colptr"] = std::vector<Index>(a.colptr().begin(), a.colptr().end());
  j["rowind"] = std::vector<Index>(a.rowind().begin(), a.rowind().end());
  j["nzval"] = std::vector<double>(a.nzval().begin(), a.nzval().end());
  return j;
}

CscMatrixd csc_from_json(const nlohmann::json& j) {
  return CscMatrixd(j.at("nrows").get<Index>(), j.at("ncols").get<Index>(),
                    j.at("colptr").get<std::vector<Index>>(), j.at("rowind").get<std::vector<Index>>(),
                    j.at("nzval").get<std::vector<double>>());
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

nlohmann::ordered_json to_json(const QpProblemd& prob) {
  nlohmann::ordered_json j;
  j["n"] = prob.n();
  j["m"] = prob.m();
  j["m1"] = prob.m1;
  j["m2"] = prob.m2;
  j["c"] = to_std(prob.c);
  j["b"] = to_std(prob.b);
  j["P"] = csc_to_json(prob.P);
  j["A"] = csc_to_json(prob.A);
  return j;
}

QpProblemd problem_from_json(const nlohmann::json& doc) {
  QpProblemd prob;
  try {
    prob.P = csc_from_json(doc.at("P"));
    prob.A = csc_from_json(doc.at("A"));
    prob.c = to_eigen(doc.at("c").get<std::vector<double>>());
    prob.b = to_eigen(doc.at("b").get<std::vector<double>>());
    prob.m1 = doc.at("m1").get<Index>();
    prob.m2 = doc.at("m2").get<Index>();
    if (doc.at("n").get<Index>() != prob.n() || doc.at("m").get<Index>() != prob.m())
      throw std::invalid_argument("n/m disagree with the vector lengths");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("problem JSON: ") + e.what());
  }
  prob.validate();
  return prob;
}

std::string dump_problem(const QpProblemd& prob) { return to_json(prob).dump(); }

void write_problem(const std::filesystem::path& path, const QpProblemd& prob) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << dump_problem(prob) << '\n';
}

QpProblemd read_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return problem_from_json(nlohmann::json::parse(buf.str()));
}

}  // namespace kqp::bench
