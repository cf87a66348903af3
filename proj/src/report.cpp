#include <cstdio>

#include "proxyclust/matrix_io.hpp"
#include "proxyclust/pipeline.hpp"

namespace proxyclust {

namespace {

std::string num(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string exact(double v) { return num(v, "%.17g"); }

}  // namespace

std::string format_metrics_table(const PipelineResult& result) {
  std::string out = "concept,clustering,nmi_mean,nmi_best,ri_mean,ri_best,inertia\n";
  for (const auto& c : result.concepts) {
    if (!c.ok) continue;
    for (std::size_t t = 0; t < c.metrics.size(); ++t) {
      const auto& m = c.metrics[t];
      out += c.concept_word + "," + result.truth_names[t] + "," + num(m.nmi_mean) + "," + num(m.nmi_best) + "," +
             num(m.ri_mean) + "," + num(m.ri_best) + "," + num(c.restarts.best_run().inertia) + "\n";
    }
  }
  return out;
}

std::string format_cross_clustering(const PipelineResult& result) {
  std::string out = "metric,concept";
  for (const auto& t : result.truth_names) out += "," + t;
  out += "\n";
  Index row = 0;
  for (const auto& c : result.concepts) {
    if (!c.ok) continue;
    for (const char* metric : {"nmi", "ri"}) {
      const Matrix& m = std::string(metric) == "nmi" ? result.cross.nmi : result.cross.ri;
      out += std::string(metric) + "," + c.concept_word;
      for (Index t = 0; t < m.cols(); ++t) out += "," + num(m(row, t));
      out += "\n";
    }
    ++row;
  }
  return out;
}

std::string format_run_manifest(const PipelineResult& result) {
  std::string out;
  out += "backend " + result.backend + "\n";
  out += "seed " + std::to_string(result.seed) + "\n";
  out += "variant " + to_string(result.variant) + "\n";
  for (const auto& c : result.concepts) {
    out += "\n[concept " + c.concept_word + "]\n";
    out += "status " + std::string(c.ok ? "ok" : "failed") + "\n";
    if (!c.ok) {
      out += "error " + c.error + "\n";
      continue;
    }
    const auto& h = c.hyper;
    out += "spec_hash " + c.spec_hash + "\n";
    out += "clustering " + c.clustering + "\n";
    out += "k " + std::to_string(c.k) + "\n";
    out += "alpha " + exact(h.alpha) + "\n";
    out += "beta " + exact(h.beta) + "\n";
    out += "lambda " + exact(h.lambda) + "\n";
    out += "learning_rate " + exact(h.learning_rate) + "\n";
    out += "weight_decay " + exact(h.weight_decay) + "\n";
    out += "momentum " + exact(h.momentum) + "\n";
    out += "iterations " + std::to_string(h.iterations) + "\n";
    out += "restarts " + std::to_string(c.restarts.runs.size()) + "\n";
    out += "best_restart " + std::to_string(c.restarts.best) + "\n";
    out += "mean_final_loss " + exact(c.batch.mean_final_loss) + "\n";
    out += "best_inertia " + exact(c.restarts.best_run().inertia) + "\n";
  }
  return out;
}

std::string format_grid_report(const GridReport& report) {
  std::string out = "learning_rate,weight_decay,alpha,beta,mean_loss,status\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& p = report.points[i];
    out += exact(p.hyper.learning_rate) + "," + exact(p.hyper.weight_decay) + "," + exact(p.hyper.alpha) + "," +
           exact(p.hyper.beta) + "," + (p.ok ? exact(p.mean_loss) : std::string("nan")) + "," +
           (i == report.best ? "best" : (p.ok ? "ok" : "diverged")) + "\n";
  }
  return out;
}

void export_report(const PipelineResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "metrics.csv", format_metrics_table(result));
  write_file_atomic(dir / "cross_clustering.csv", format_cross_clustering(result));
}

}  // namespace proxyclust
