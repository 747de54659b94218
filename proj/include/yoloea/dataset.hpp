#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yoloea/evaluation.hpp"
#include "yoloea/geometry.hpp"
#include "yoloea/postprocess.hpp"

namespace yoloea {

/// One line of a YOLO label file: class and normalised center/size.
struct LabelRecord
{
    int class_id = 0;
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    /// Present on prediction files only.
    std::optional<double> confidence;

    /// Pixel box on an image of the given size.
    Box to_box(int image_width, int image_height) const noexcept;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

struct LabelFile
{
    std::string image_id;
    int image_width = 0;
    int image_height = 0;
    std::vector<LabelRecord> records;

    std::vector<Box> boxes() const;
    std::vector<GroundTruthBox> ground_truths() const;
    /// Records without a confidence become detections of confidence 1.
    std::vector<Detection> detections() const;

    friend bool operator==(const LabelFile&, const LabelFile&) = default;
};

/// Normalised extents may overshoot [0, 1] by this much before a line is rejected.
inline constexpr double kExtentTolerance = 1e-6;

/// Parses `class cx cy w h [confidence]` lines. Blank lines are skipped.
/// Throws ParseError (1-based line number) on a wrong field count, a
/// non-numeric field, an out-of-range value, or a confidence column that is
/// present when not expected (or missing when expected). Throws
/// std::invalid_argument on non-positive image dimensions.
LabelFile parse_labels(std::string_view text, int image_width, int image_height, bool expect_confidence,
                       std::string image_id = {});

/// Inverse of parse_labels; numbers use the shortest round-trip form.
std::string serialize_labels(const LabelFile& file);

struct ManifestEntry
{
    std::string image_id;
    int width = 0;
    int height = 0;
};

/// CSV `image_id,width,height`, optional header row.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

/// Reads `<dir>/<image_id>.txt` for every manifest entry; a missing file is
/// an image without labels. Throws Error for a `.txt` file with no manifest entry.
std::vector<LabelFile> load_label_dir(const std::filesystem::path& dir, const std::vector<ManifestEntry>& manifest,
                                      bool expect_confidence);

/// Pairs ground-truth and prediction files by image id into evaluation samples.
std::vector<ImageSample> make_samples(const std::vector<LabelFile>& ground_truth,
                                      const std::vector<LabelFile>& predictions);

inline constexpr double kOcclusionLow = 0.05;
inline constexpr double kOcclusionHigh = 0.35;

/// Fraction of boxes[index] covered by the union of every other box.
/// Exact: coordinate compression on x, interval union on y.
/// Throws DegenerateBoxError when boxes[index] has zero area and
/// std::out_of_range for a bad index.
double occlusion_fraction(std::size_t index, std::span<const Box> boxes);

/// 0.05 <= fraction < 0.35.
bool classify_occluded(double fraction) noexcept;

struct OcclusionRecord
{
    std::size_t box_index = 0;
    double occlusion_fraction = 0.0;
    bool occluded = false;
};

std::vector<OcclusionRecord> occlusion_records(std::span<const Box> boxes);

struct DatasetSummary
{
    struct ClassCounts
    {
        std::size_t total = 0;
        std::size_t occluded = 0;

        friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
    };

    std::size_t num_images = 0;
    std::map<int, ClassCounts> classes;
    std::size_t total = 0;
    std::size_t occluded = 0;
};

/// Per-class sample and occluded counts. Occlusion is measured within each
/// image against all other boxes, whatever their class.
DatasetSummary summarize(const std::vector<LabelFile>& files);

} // namespace yoloea
