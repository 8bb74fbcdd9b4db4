#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pageseg/imaging.hpp"

namespace pageseg {

enum class TextClass { kMain = 1, kSide = 2 };

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Counts over pixels that are foreground (label != 0) in gt or pred.
ConfusionCounts confusion(const PageSegmentation& pred, const PageSegmentation& gt, TextClass cls);

/// 0/0 is taken as 0 for every ratio.
Scores f_measure(const ConfusionCounts& counts);

struct ClassResult {
  ConfusionCounts counts;
  Scores scores;
};

struct DocumentResult {
  std::string id;
  ClassResult main;
  ClassResult side;
};

struct BaselineRow {
  std::string method;
  double main_f;  // percent
  double side_f;
};

/// Published F-measures on the 10-page test split of the reference dataset.
const std::vector<BaselineRow>& reference_baselines();

struct FMeasureReport {
  std::vector<DocumentResult> documents;
  ClassResult main;  // micro-averaged over documents
  ClassResult side;
  std::vector<std::string> missing;  // ground-truth ids without a prediction
};

/// Matches documents by id. Predictions without ground truth are ignored.
FMeasureReport evaluate_corpus(const std::map<std::string, PageSegmentation>& preds,
                               const std::map<std::string, PageSegmentation>& gts);

/// id,main_precision,...; aggregate row last with id "micro".
void write_report_csv(const std::filesystem::path& path, const FMeasureReport& report);
std::string format_report_table(const FMeasureReport& report);

}  // namespace pageseg
