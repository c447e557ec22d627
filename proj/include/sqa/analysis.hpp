#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqa/corpus.hpp"
#include "sqa/metrics.hpp"

namespace sqa {

enum class Metric { Tos, Aos };

std::string_view to_string(Metric metric);

// One transcript source evaluated end to end. All values are percentages.
struct SystemPoint {
    std::string system_name;
    double wer = 0.0;
    double mean_tos = 0.0;
    double mean_aos = 0.0;

    double score(Metric metric) const { return metric == Metric::Tos ? mean_tos : mean_aos; }
};

// score = intercept + slope * wer, in score points per WER point.
struct DegradationFit {
    Metric metric = Metric::Tos;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
    bool include_reference = false;

    double predict(double wer) const { return intercept + slope * wer; }
};

// Ordinary least squares of the metric against WER. Points with WER 0 (the
// manual transcription) are skipped unless include_reference is set.
DegradationFit fit_degradation(std::span<const SystemPoint> points, Metric metric,
                               bool include_reference = false);

struct SystemTranscripts {
    std::string name;
    std::vector<ResponseRecord> transcripts;
    // Sample id -> predicted word span over this system's transcript.
    std::map<std::string, std::optional<WordSpan>> predictions;
};

// Per system: corpus WER against the reference transcripts (total errors
// over total reference words), and mean TOS/AOS of its predictions against
// the reference gold annotations. Predicted spans get audio times by
// transferring the reference timestamps onto the system's words.
std::vector<SystemPoint> build_system_points(const std::vector<ResponseRecord>& reference,
                                             const std::vector<SystemTranscripts>& systems,
                                             const EvalOptions& options = {});

// Reads system,wer,tos,aos rows (percentages) as written by emit_report.
std::vector<SystemPoint> parse_system_points_csv(std::istream& in);

struct ReportFiles {
    std::vector<std::filesystem::path> written;
    std::vector<std::string> warnings;
};

// Writes into `directory`:
//   systems.csv / systems_full.csv         system,wer,tos,aos sorted by WER
//   degradation.csv / degradation_full.csv metric,kind,wer,score
//                                          (observed points and fit line
//                                          sampled at every integer WER)
//   fits.csv                               metric,slope,intercept,r_squared,n_points,include_reference
// The short files use one decimal place; *_full.csv and fits.csv keep full
// precision. Fit files are skipped, with a warning, when fits is empty.
ReportFiles emit_report(std::span<const SystemPoint> points, std::span<const DegradationFit> fits,
                        const std::filesystem::path& directory);

} // namespace sqa
