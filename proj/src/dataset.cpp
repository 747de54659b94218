#include "yoloea/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "yoloea/errors.hpp"

namespace yoloea {

namespace {

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        if (end == std::string_view::npos)
            break;
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t')
            ++i;
        if (i > start)
            fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view token)
{
    T value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        return std::nullopt;
    return value;
}

double parse_unit(std::string_view token, std::size_t line, const char* name)
{
    const auto v = parse_number<double>(token);
    if (!v || !std::isfinite(*v))
        throw ParseError(line, std::string(name) + " '" + std::string(token) + "' is not a number");
    if (*v < 0.0 || *v > 1.0)
        throw ParseError(line, std::string(name) + " " + std::string(token) + " is outside [0, 1]");
    return *v;
}

void append_number(std::string& out, double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Box LabelRecord::to_box(int image_width, int image_height) const noexcept
{
    const double W = image_width;
    const double H = image_height;
    return {(cx - w / 2.0) * W, (cy - h / 2.0) * H, (cx + w / 2.0) * W, (cy + h / 2.0) * H};
}

std::vector<Box> LabelFile::boxes() const
{
    std::vector<Box> out;
    out.reserve(records.size());
    for (const LabelRecord& r : records)
        out.push_back(r.to_box(image_width, image_height));
    return out;
}

std::vector<GroundTruthBox> LabelFile::ground_truths() const
{
    std::vector<GroundTruthBox> out;
    out.reserve(records.size());
    for (const LabelRecord& r : records)
        out.push_back({r.class_id, r.to_box(image_width, image_height)});
    return out;
}

std::vector<Detection> LabelFile::detections() const
{
    std::vector<Detection> out;
    out.reserve(records.size());
    for (const LabelRecord& r : records)
        out.push_back({r.class_id, r.confidence.value_or(1.0), r.to_box(image_width, image_height)});
    return out;
}

LabelFile parse_labels(std::string_view text, int image_width, int image_height, bool expect_confidence,
                       std::string image_id)
{
    if (image_width <= 0 || image_height <= 0)
        throw std::invalid_argument("image dimensions must be positive");

    LabelFile file{std::move(image_id), image_width, image_height, {}};
    const auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t line_no = n + 1;
        const auto fields = split_fields(lines[n]);
        if (fields.empty())
            continue;
        if (fields.size() == 6 && !expect_confidence)
            throw ParseError(line_no, "unexpected confidence column in a ground-truth file");
        if (fields.size() == 5 && expect_confidence)
            throw ParseError(line_no, "missing confidence column in a prediction file");
        if (fields.size() != 5 && fields.size() != 6)
            throw ParseError(line_no, "expected " + std::string(expect_confidence ? "6" : "5") + " fields, got " +
                                          std::to_string(fields.size()));

        LabelRecord r;
        const auto cls = parse_number<int>(fields[0]);
        if (!cls || *cls < 0)
            throw ParseError(line_no, "class id '" + std::string(fields[0]) + "' is not a non-negative integer");
        r.class_id = *cls;
        r.cx = parse_unit(fields[1], line_no, "cx");
        r.cy = parse_unit(fields[2], line_no, "cy");
        r.w = parse_unit(fields[3], line_no, "w");
        r.h = parse_unit(fields[4], line_no, "h");
        if (fields.size() == 6)
            r.confidence = parse_unit(fields[5], line_no, "confidence");

        if (r.cx - r.w / 2.0 < -kExtentTolerance || r.cx + r.w / 2.0 > 1.0 + kExtentTolerance)
            throw ParseError(line_no, "box extends outside the image horizontally");
        if (r.cy - r.h / 2.0 < -kExtentTolerance || r.cy + r.h / 2.0 > 1.0 + kExtentTolerance)
            throw ParseError(line_no, "box extends outside the image vertically");
        file.records.push_back(r);
    }
    return file;
}

std::string serialize_labels(const LabelFile& file)
{
    std::string out;
    for (const LabelRecord& r : file.records) {
        out += std::to_string(r.class_id);
        for (double v : {r.cx, r.cy, r.w, r.h}) {
            out += ' ';
            append_number(out, v);
        }
        if (r.confidence) {
            out += ' ';
            append_number(out, *r.confidence);
        }
        out += '\n';
    }
    return out;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text)
{
    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    const auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::size_t line_no = n + 1;
        const std::string_view line = trim(lines[n]);
        if (line.empty())
            continue;

        std::vector<std::string_view> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (cells.size() != 3)
            throw ParseError(line_no, "manifest rows need image_id,width,height");
        if (entries.empty() && seen.empty() && cells[0] == "image_id")
            continue;

        const auto w = parse_number<int>(cells[1]);
        const auto h = parse_number<int>(cells[2]);
        if (cells[0].empty())
            throw ParseError(line_no, "empty image id");
        if (!w || !h || *w <= 0 || *h <= 0)
            throw ParseError(line_no, "image dimensions must be positive integers");
        if (!seen.insert(std::string(cells[0])).second)
            throw ParseError(line_no, "duplicate image id '" + std::string(cells[0]) + "'");
        entries.push_back({std::string(cells[0]), *w, *h});
    }
    return entries;
}

std::vector<LabelFile> load_label_dir(const std::filesystem::path& dir, const std::vector<ManifestEntry>& manifest,
                                      bool expect_confidence)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw Error("not a directory: " + dir.string());

    std::set<std::string> known;
    for (const ManifestEntry& e : manifest)
        known.insert(e.image_id);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt" &&
            !known.count(entry.path().stem().string()))
            throw Error("label file " + entry.path().string() + " has no manifest entry");
    }

    std::vector<LabelFile> files;
    files.reserve(manifest.size());
    for (const ManifestEntry& e : manifest) {
        const fs::path path = dir / (e.image_id + ".txt");
        const std::string text = fs::exists(path) ? read_file(path) : std::string();
        try {
            files.push_back(parse_labels(text, e.width, e.height, expect_confidence, e.image_id));
        } catch (const ParseError& err) {
            throw ParseError(err.line(), path.string() + ": " + err.reason());
        }
    }
    return files;
}

std::vector<ImageSample> make_samples(const std::vector<LabelFile>& ground_truth,
                                      const std::vector<LabelFile>& predictions)
{
    std::map<std::string, const LabelFile*> preds;
    for (const LabelFile& p : predictions)
        preds[p.image_id] = &p;

    std::vector<ImageSample> samples;
    samples.reserve(ground_truth.size());
    for (const LabelFile& g : ground_truth) {
        ImageSample s{g.image_id, {}, g.ground_truths()};
        if (const auto it = preds.find(g.image_id); it != preds.end()) {
            s.detections = it->second->detections();
            preds.erase(it);
        }
        samples.push_back(std::move(s));
    }
    if (!preds.empty())
        throw Error("predictions for unknown image '" + preds.begin()->first + "'");
    return samples;
}

double occlusion_fraction(std::size_t index, std::span<const Box> boxes)
{
    if (index >= boxes.size())
        throw std::out_of_range("occlusion subject index out of range");
    const Box& subject = boxes[index];
    const double subject_area = area(subject);
    if (!(subject_area > 0.0))
        throw DegenerateBoxError("occlusion subject has zero area");

    std::vector<Box> clipped;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        if (j == index)
            continue;
        const Box c{std::max(boxes[j].x_min, subject.x_min), std::max(boxes[j].y_min, subject.y_min),
                    std::min(boxes[j].x_max, subject.x_max), std::min(boxes[j].y_max, subject.y_max)};
        if (c.x_max > c.x_min && c.y_max > c.y_min)
            clipped.push_back(c);
    }
    if (clipped.empty())
        return 0.0;

    std::vector<double> xs;
    xs.reserve(2 * clipped.size());
    for (const Box& c : clipped) {
        xs.push_back(c.x_min);
        xs.push_back(c.x_max);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    double covered = 0.0;
    std::vector<std::pair<double, double>> spans;
    for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        const double x_lo = xs[s];
        const double x_hi = xs[s + 1];
        spans.clear();
        for (const Box& c : clipped)
            if (c.x_min <= x_lo && c.x_max >= x_hi)
                spans.emplace_back(c.y_min, c.y_max);
        if (spans.empty())
            continue;
        std::sort(spans.begin(), spans.end());

        double length = 0.0;
        double run_lo = spans.front().first;
        double run_hi = spans.front().second;
        for (std::size_t k = 1; k < spans.size(); ++k) {
            if (spans[k].first > run_hi) {
                length += run_hi - run_lo;
                run_lo = spans[k].first;
                run_hi = spans[k].second;
            } else {
                run_hi = std::max(run_hi, spans[k].second);
            }
        }
        length += run_hi - run_lo;
        covered += (x_hi - x_lo) * length;
    }
    return std::clamp(covered / subject_area, 0.0, 1.0);
}

bool classify_occluded(double fraction) noexcept
{
    return fraction >= kOcclusionLow && fraction < kOcclusionHigh;
}

std::vector<OcclusionRecord> occlusion_records(std::span<const Box> boxes)
{
    std::vector<OcclusionRecord> out;
    out.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const double f = occlusion_fraction(i, boxes);
        out.push_back({i, f, classify_occluded(f)});
    }
    return out;
}

DatasetSummary summarize(const std::vector<LabelFile>& files)
{
    DatasetSummary summary;
    summary.num_images = files.size();
    for (const LabelFile& file : files) {
        if (std::any_of(file.records.begin(), file.records.end(),
                        [](const LabelRecord& r) { return r.confidence.has_value(); }))
            throw Error("summarize expects ground-truth files, '" + file.image_id + "' has confidences");
        const std::vector<Box> boxes = file.boxes();
        std::vector<OcclusionRecord> records;
        try {
            records = occlusion_records(boxes);
        } catch (const DegenerateBoxError& err) {
            throw DegenerateBoxError("image '" + file.image_id + "': " + err.what());
        }
        for (const OcclusionRecord& rec : records) {
            auto& counts = summary.classes[file.records[rec.box_index].class_id];
            ++counts.total;
            ++summary.total;
            if (rec.occluded) {
                ++counts.occluded;
                ++summary.occluded;
            }
        }
    }
    return summary;
}

} // namespace yoloea
