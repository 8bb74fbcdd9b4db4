#include "pageseg/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pageseg/errors.hpp"

namespace pageseg {

ConfusionCounts confusion(const PageSegmentation& pred, const PageSegmentation& gt, TextClass cls) {
  if (!pred.same_shape(gt)) throw ShapeError("prediction and ground truth differ in size");
  const auto c = static_cast<std::uint8_t>(cls);
  ConfusionCounts k;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint8_t p = pred.data()[i];
    const std::uint8_t g = gt.data()[i];
    if (p == 0 && g == 0) continue;
    if (p == c && g == c) ++k.tp;
    else if (p == c) ++k.fp;
    else if (g == c) ++k.fn;
  }
  return k;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

ClassResult scored(const ConfusionCounts& c) { return {c, f_measure(c)}; }

}  // namespace

Scores f_measure(const ConfusionCounts& c) {
  Scores s;
  s.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  s.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  s.f = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

const std::vector<BaselineRow>& reference_baselines() {
  static const std::vector<BaselineRow> rows = {
      {"Bukhari et al.", 95.02, 94.68},
      {"Kurar et al.", 95.00, 80.00},
      {"Alaasam et al.", 98.59, 96.89},
      {"Proposed (published)", 98.56, 96.97},
  };
  return rows;
}

FMeasureReport evaluate_corpus(const std::map<std::string, PageSegmentation>& preds,
                               const std::map<std::string, PageSegmentation>& gts) {
  FMeasureReport r;
  ConfusionCounts main_total;
  ConfusionCounts side_total;
  for (const auto& [id, gt] : gts) {
    const auto it = preds.find(id);
    if (it == preds.end()) {
      r.missing.push_back(id);
      continue;
    }
    DocumentResult d;
    d.id = id;
    d.main = scored(confusion(it->second, gt, TextClass::kMain));
    d.side = scored(confusion(it->second, gt, TextClass::kSide));
    main_total += d.main.counts;
    side_total += d.side.counts;
    r.documents.push_back(std::move(d));
  }
  r.main = scored(main_total);
  r.side = scored(side_total);
  return r;
}

namespace {

void csv_row(std::ostream& out, const std::string& id, const ClassResult& m, const ClassResult& s) {
  out << id;
  for (const ClassResult* c : {&m, &s}) {
    out << ',' << c->counts.tp << ',' << c->counts.fp << ',' << c->counts.fn << ',' << c->scores.precision << ','
        << c->scores.recall << ',' << c->scores.f;
  }
  out << '\n';
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%6.2f", v);
  return buf;
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, const FMeasureReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  out << "id,main_tp,main_fp,main_fn,main_precision,main_recall,main_f,"
         "side_tp,side_fp,side_fn,side_precision,side_recall,side_f\n";
  for (const auto& d : report.documents) csv_row(out, d.id, d.main, d.side);
  csv_row(out, "micro", report.main, report.side);
  if (!out) throw IoError("failed writing " + path.string());
}

std::string format_report_table(const FMeasureReport& report) {
  std::ostringstream out;
  out << "Pixel-level F-measure (%), foreground pixels only, micro-averaged over " << report.documents.size()
      << " document(s)\n\n";
  char line[128];
  std::snprintf(line, sizeof(line), "%-24s %10s %10s\n", "Method", "Main text", "Side text");
  out << line;
  out << std::string(46, '-') << '\n';
  for (const auto& b : reference_baselines()) {
    std::snprintf(line, sizeof(line), "%-24s %10s %10s\n", b.method.c_str(), pct(b.main_f).c_str(),
                  pct(b.side_f).c_str());
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-24s %10s %10s\n", "This run", pct(100.0 * report.main.scores.f).c_str(),
                pct(100.0 * report.side.scores.f).c_str());
  out << line;
  if (!report.documents.empty()) {
    out << "\nPer document (P / R / F, %)\n";
    for (const auto& d : report.documents) {
      out << "  " << d.id << "  main " << pct(100 * d.main.scores.precision) << " /" << pct(100 * d.main.scores.recall)
          << " /" << pct(100 * d.main.scores.f) << "   side " << pct(100 * d.side.scores.precision) << " /"
          << pct(100 * d.side.scores.recall) << " /" << pct(100 * d.side.scores.f) << '\n';
    }
  }
  if (!report.missing.empty()) {
    out << "\nMissing predictions (excluded):";
    for (const auto& id : report.missing) out << ' ' << id;
    out << '\n';
  }
  return out.str();
}

}  // namespace pageseg
