#include "streamad/reports.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "streamad/errors.hpp"

namespace streamad {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_score_csv(const std::string& path, const std::vector<ScoreRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "index,loss,mu,tau,admitted,label\n";
  for (const ScoreRecord& r : records) {
    out << r.index << ',' << fmt_double(r.loss) << ',' << fmt_double(r.mu) << ','
        << fmt_double(r.tau) << ',' << (r.admitted ? 1 : 0) << ',' << r.label << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

std::vector<ScoreRecord> read_score_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "index,loss,mu,tau,admitted,label") {
    throw FormatError(path + ": missing score CSV header");
  }
  std::vector<ScoreRecord> records;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ScoreRecord r;
    int admitted = 0;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%d,%d", &r.index, &r.loss, &r.mu, &r.tau,
                    &admitted, &r.label) != 6) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    r.admitted = admitted != 0;
    r.numeric_error = !std::isfinite(r.loss);
    records.push_back(r);
  }
  return records;
}

void write_stream_manifest(const std::string& path, const std::vector<StreamSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# clip frame label\n";
  for (const StreamSample& s : samples) out << s.clip << ' ' << s.frame << ' ' << s.label << '\n';
  if (!out) throw IoError("short write to " + path);
}

void render_roc_svg(const std::string& path, const std::vector<RocSeries>& series) {
  for (const RocSeries& s : series) {
    for (const RocPoint& p : s.points) {
      if (p.fpr < 0 || p.fpr > 1 || p.tpr < 0 || p.tpr > 1) {
        throw InputError("render_roc_svg: point outside [0,1]^2 in series '" + s.name + "'");
      }
    }
  }
  const int size = 480, margin = 48;
  const double plot = size - 2.0 * margin;
  auto px = [&](double fpr) { return margin + fpr * plot; };
  auto py = [&](double tpr) { return margin + (1.0 - tpr) * plot; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"white\"/>\n";
  out << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\""
      << plot << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
      << py(1) << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
  out << "  <text x=\"" << size / 2 << "\" y=\"" << size - 10
      << "\" text-anchor=\"middle\" font-size=\"14\">false positive rate</text>\n";
  out << "  <text x=\"14\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
      << "transform=\"rotate(-90 14 " << size / 2 << ")\">true positive rate</text>\n";
  int ci = 0;
  for (const RocSeries& s : series) {
    const char* color = palette[ci % 6];
    out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) out << ' ';
      out << px(s.points[i].fpr) << ',' << py(s.points[i].tpr);
    }
    out << "\"/>\n";
    out << "  <text x=\"" << margin + 8 << "\" y=\"" << margin + 16 + 16 * ci
        << "\" font-size=\"12\" fill=\"" << color << "\">" << s.name << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  if (!out) throw IoError("short write to " + path);
}

void write_metric_report(const std::string& path, const std::string& title,
                         const std::vector<ReplicateResult>& replicates,
                         const std::vector<std::string>& notes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# " << title << "\n\n";
  out << "replicate\tauc\teer\tadmitted\ttotal\tcrossover\n";
  std::vector<double> aucs;
  for (const ReplicateResult& r : replicates) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s\t%.6f\t%.6f\t%ld\t%ld\t%ld\n", r.name.c_str(), r.auc, r.eer,
                  r.admitted, r.total, r.crossover_index);
    out << buf;
    aucs.push_back(r.auc);
  }
  if (!aucs.empty()) {
    const Aggregate a = aggregate(aucs);
    char buf[80];
    std::snprintf(buf, sizeof buf, "\nmean_auc\t%.6f\nsd_auc\t%.6f\n", a.mean, a.sd);
    out << buf;
  }
  for (const std::string& n : notes) out << "note\t" << n << "\n";
  if (!out) throw IoError("short write to " + path);
}

}  // namespace streamad
