#include "yoloea/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "yoloea/attention.hpp"
#include "yoloea/dataset.hpp"
#include "yoloea/errors.hpp"
#include "yoloea/evaluation.hpp"
#include "yoloea/geometry.hpp"
#include "yoloea/losses.hpp"
#include "yoloea/postprocess.hpp"

namespace yoloea::cli {

namespace {

using Json = nlohmann::ordered_json;

/// Bad flag value detected after CLI11 parsing.
class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

std::string number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* flag)
{
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        const std::string cell = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        double v{};
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
            throw UsageError(std::string(flag) + ": '" + cell + "' is not a number");
        values.push_back(v);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    if (values.size() != expected)
        throw UsageError(std::string(flag) + " expects " + std::to_string(expected) + " comma-separated values");
    return values;
}

Box parse_box(const std::string& text, const char* flag)
{
    const auto v = parse_list(text, 4, flag);
    const Box b{v[0], v[1], v[2], v[3]};
    if (!is_valid(b))
        throw UsageError(std::string(flag) + " must satisfy x1 <= x2 and y1 <= y2");
    return b;
}

std::vector<std::size_t> parse_sizes(const std::string& text, std::size_t expected, const char* flag)
{
    std::vector<std::size_t> out;
    for (double v : parse_list(text, expected, flag)) {
        if (v < 1.0 || v != std::floor(v) || v > 1e9)
            throw UsageError(std::string(flag) + " entries must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

Json box_json(const Box& b)
{
    return Json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Plain aligned table for the human-readable format.
void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c)
        width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
            width[c] = std::max(width[c], row[c].size());

    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c + 1 < cells.size())
                out << std::left << std::setw(static_cast<int>(width[c])) << cells[c] << "  ";
            else
                out << cells[c];
        }
        out << '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (std::size_t w : width)
        rule.emplace_back(w, '-');
    line(rule);
    for (const auto& row : rows)
        line(row);
}

void print_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows)
{
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            out << (c ? "," : "") << cells[c];
        out << '\n';
    };
    line(header);
    for (const auto& row : rows)
        line(row);
}

/// A result renders as JSON, or as a single table used for both CSV and the
/// human-readable format.
struct Rendered
{
    Json json;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void emit(std::ostream& out, OutputFormat format, const Rendered& r)
{
    switch (format) {
    case OutputFormat::Json: out << r.json.dump(2) << '\n'; break;
    case OutputFormat::Csv: print_csv(out, r.header, r.rows); break;
    case OutputFormat::Table: print_table(out, r.header, r.rows); break;
    }
}

// loss ------------------------------------------------------------------

struct LossArgs
{
    std::string kind = "giou";
    std::string pred;
    std::string gt;
    bool grad = false;
};

Rendered run_loss(const LossArgs& a)
{
    const LossKind kind = parse_loss_kind(a.kind);
    const Box pred = parse_box(a.pred, "--pred");
    const Box gt = parse_box(a.gt, "--gt");

    const double loss = loss_value(kind, pred, gt);
    double metric = 1.0 - loss;
    if (kind == LossKind::GIOU)
        metric = giou_value(pred, gt);

    Rendered r;
    r.json = {{"command", "loss"}, {"kind", std::string(to_string(kind))}, {"pred", box_json(pred)},
              {"gt", box_json(gt)},    {"iou", iou(pred, gt)},              {"metric", metric},
              {"loss", loss}};
    r.header = {"kind", "iou", "metric", "loss"};
    r.rows.push_back({std::string(to_string(kind)), number(iou(pred, gt)), number(metric), number(loss)});

    if (a.grad) {
        const LossEval e = loss_with_grad(kind, pred, gt);
        const CornerGrad c = to_corner_grad(e.grad);
        r.json["gradient"] = {{"cx", e.grad.cx}, {"cy", e.grad.cy}, {"w", e.grad.w}, {"h", e.grad.h}};
        r.json["gradient_corners"] = {{"x_min", c.x_min}, {"y_min", c.y_min}, {"x_max", c.x_max}, {"y_max", c.y_max}};
        for (const char* h : {"d_cx", "d_cy", "d_w", "d_h"})
            r.header.emplace_back(h);
        for (double v : {e.grad.cx, e.grad.cy, e.grad.w, e.grad.h})
            r.rows.back().push_back(number(v));
    }
    return r;
}

// fit -------------------------------------------------------------------

struct FitArgs
{
    std::string kind = "eiou";
    std::string init;
    std::string gt;
    double lr = 1000.0;
    std::size_t steps = 100000;
    std::size_t stride = 1;
};

Rendered run_fit(const FitArgs& a)
{
    const LossKind kind = parse_loss_kind(a.kind);
    const Box init = parse_box(a.init, "--init");
    const Box gt = parse_box(a.gt, "--gt");
    if (!(area(init) > 0.0))
        throw UsageError("--init must have positive area");

    FitOptions opt;
    opt.step_size = a.lr;
    opt.max_steps = a.steps;
    const FitTrace trace = fit_box(init, gt, kind, opt);

    Rendered r;
    r.header = {"step", "x_min", "y_min", "x_max", "y_max", "cx", "cy", "w", "h", "loss"};
    Json points = Json::array();
    auto record = [&](const FitStep& s) {
        points.push_back({{"step", s.step},
                          {"box", box_json(s.box)},
                          {"center", Json::array({s.params.cx, s.params.cy})},
                          {"size", Json::array({s.params.w, s.params.h})},
                          {"loss", s.loss}});
        r.rows.push_back({std::to_string(s.step), number(s.box.x_min), number(s.box.y_min), number(s.box.x_max),
                          number(s.box.y_max), number(s.params.cx), number(s.params.cy), number(s.params.w),
                          number(s.params.h), number(s.loss)});
    };
    record(trace.initial);
    for (std::size_t i = 0; i < trace.steps.size(); ++i)
        if ((i + 1) % a.stride == 0 || i + 1 == trace.steps.size())
            record(trace.steps[i]);

    const FitStep& last = trace.last();
    r.json = {{"command", "fit"},
              {"kind", std::string(to_string(kind))},
              {"init", box_json(init)},
              {"gt", box_json(gt)},
              {"lr", a.lr},
              {"max_steps", a.steps},
              {"stride", a.stride},
              {"accepted_steps", trace.accepted_steps()},
              {"termination", std::string(to_string(trace.termination))},
              {"initial_loss", trace.initial.loss},
              {"final_loss", last.loss},
              {"final_box", box_json(last.box)},
              {"terminal_center_offset", trace.terminal_center_offset},
              {"trace", std::move(points)}};
    return r;
}

// eca -------------------------------------------------------------------

struct EcaArgs
{
    std::string shape;
    std::uint64_t seed = 0;
    int gamma = 2;
    int b = 1;
    int kernel = 0;
    std::string weights_out;
    std::size_t check_samples = 64;
    double fd_step = 1e-6;
};

double scalar_objective(const FeatureMap& x, const EcaWeights& w, const FeatureMap& grad_out)
{
    const FeatureMap y = eca_forward(x, w).output;
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        s += y.data()[i] * grad_out.data()[i];
    return s;
}

double relative_error(double analytic, double numeric)
{
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / scale;
}

Rendered run_eca(const EcaArgs& a)
{
    const auto s = parse_sizes(a.shape, 4, "--shape");
    const FeatureMap::Dims dims{s[0], s[1], s[2], s[3]};
    if (dims.size() > 50'000'000)
        throw UsageError("--shape is too large");

    const EcaConfig cfg{a.gamma, a.b};
    const int k = a.kernel > 0 ? a.kernel : adaptive_kernel_size(dims.c, cfg);
    const EcaWeights weights = random_eca_weights(static_cast<std::size_t>(k), a.seed);

    std::mt19937_64 rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    FeatureMap x(dims), grad_out(dims);
    for (double& v : x.data())
        v = unit(rng);
    for (double& v : grad_out.data())
        v = unit(rng);

    const EcaForward fwd = eca_forward(x, weights);
    const EcaGradients grads = eca_backward(fwd.cache, grad_out);

    // Central differences on every kernel weight and a seeded subset of inputs.
    double max_err_w = 0.0;
    for (std::size_t m = 0; m < weights.k(); ++m) {
        EcaWeights plus = weights, minus = weights;
        plus.w[m] += a.fd_step;
        minus.w[m] -= a.fd_step;
        const double numeric = (scalar_objective(x, plus, grad_out) - scalar_objective(x, minus, grad_out)) /
                               (plus.w[m] - minus.w[m]);
        max_err_w = std::max(max_err_w, relative_error(grads.grad_weights[m], numeric));
    }
    const std::size_t samples = std::min(a.check_samples, x.size());
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    double max_err_x = 0.0;
    for (std::size_t t = 0; t < samples; ++t) {
        const std::size_t idx = samples == x.size() ? t : pick(rng);
        FeatureMap plus = x, minus = x;
        plus.data()[idx] += a.fd_step;
        minus.data()[idx] -= a.fd_step;
        const double numeric =
            (scalar_objective(plus, weights, grad_out) - scalar_objective(minus, weights, grad_out)) /
            (plus.data()[idx] - minus.data()[idx]);
        max_err_x = std::max(max_err_x, relative_error(grads.grad_input.data()[idx], numeric));
    }
    constexpr double kTolerance = 1e-6;

    Json attention = Json::array();
    Rendered r;
    r.header = {"sample", "channel", "attention"};
    for (std::size_t i = 0; i < dims.n; ++i) {
        attention.push_back(fwd.cache.attention[i]);
        for (std::size_t j = 0; j < dims.c; ++j)
            r.rows.push_back({std::to_string(i), std::to_string(j), number(fwd.cache.attention[i][j])});
    }

    r.json = {{"command", "eca"},
              {"seed", a.seed},
              {"shape", Json::array({dims.n, dims.c, dims.h, dims.w})},
              {"gamma", a.gamma},
              {"b", a.b},
              {"kernel_size", k},
              {"weights", weights.w},
              {"attention", std::move(attention)},
              {"gradient_check",
               {{"step", a.fd_step},
                {"input_samples", samples},
                {"max_rel_error_input", max_err_x},
                {"max_rel_error_weights", max_err_w},
                {"tolerance", kTolerance},
                {"passed", max_err_x < kTolerance && max_err_w < kTolerance}}}};

    if (!a.weights_out.empty()) {
        std::ofstream f(a.weights_out, std::ios::binary);
        if (!f)
            throw Error("cannot write " + a.weights_out);
        const Json w = {{"seed", a.seed}, {"kernel_size", k}, {"weights", weights.w}};
        f << w.dump(2) << '\n';
    }
    return r;
}

// nms -------------------------------------------------------------------

struct NmsArgs
{
    std::string pred_file;
    double iou = 0.45;
    double conf = 0.25;
    std::string image_size = "1,1";
};

Rendered run_nms(const NmsArgs& a)
{
    const auto size = parse_sizes(a.image_size, 2, "--image-size");
    const std::string text = read_text(a.pred_file);
    const LabelFile file = parse_labels(text, static_cast<int>(size[0]), static_cast<int>(size[1]), true,
                                        std::filesystem::path(a.pred_file).stem().string());
    const std::vector<Detection> all = file.detections();
    const std::vector<Detection> kept = nms(confidence_filter(all, a.conf), a.iou);

    Rendered r;
    r.header = {"class_id", "confidence", "x_min", "y_min", "x_max", "y_max"};
    Json dets = Json::array();
    for (const Detection& d : kept) {
        dets.push_back({{"class_id", d.class_id}, {"confidence", d.confidence}, {"box", box_json(d.box)}});
        r.rows.push_back({std::to_string(d.class_id), number(d.confidence), number(d.box.x_min),
                          number(d.box.y_min), number(d.box.x_max), number(d.box.y_max)});
    }
    r.json = {{"command", "nms"},
              {"pred_file", a.pred_file},
              {"iou_threshold", a.iou},
              {"conf_threshold", a.conf},
              {"image_size", Json::array({size[0], size[1]})},
              {"input_count", all.size()},
              {"kept_count", kept.size()},
              {"detections", std::move(dets)}};
    return r;
}

// eval ------------------------------------------------------------------

struct EvalArgs
{
    std::string gt_dir;
    std::string pred_dir;
    std::string manifest;
    double operating_iou = 0.5;
    std::optional<double> conf;
    std::optional<double> nms_iou;
    std::size_t throughput_reps = 0;
};

std::string threshold_label(double t)
{
    return "ap" + std::to_string(static_cast<int>(std::lround(t * 100.0)));
}

Rendered run_eval(const EvalArgs& a)
{
    const auto manifest = parse_manifest(read_text(a.manifest));
    const auto gts = load_label_dir(a.gt_dir, manifest, false);
    const auto preds = load_label_dir(a.pred_dir, manifest, true);
    std::vector<ImageSample> samples = make_samples(gts, preds);
    for (ImageSample& s : samples) {
        if (a.conf)
            s.detections = confidence_filter(s.detections, *a.conf);
        if (a.nms_iou)
            s.detections = nms(s.detections, *a.nms_iou);
    }

    EvalOptions opt;
    opt.operating_iou = a.operating_iou;
    const EvalReport rep = evaluate(samples, opt);
    const auto& thresholds = iou_thresholds();

    Rendered r;
    r.header = {"class_id", "num_gt", "num_detections"};
    for (double t : thresholds)
        r.header.push_back(threshold_label(t));
    for (const char* h : {"ap50_95", "precision", "recall"})
        r.header.emplace_back(h);

    Json classes = Json::array();
    for (const ClassReport& c : rep.classes) {
        Json curve = Json::array();
        for (const PrPoint& p : c.pr_curve)
            curve.push_back(Json::array({p.confidence, p.precision, p.recall}));
        classes.push_back({{"class_id", c.class_id},
                           {"num_gt", c.num_gt},
                           {"num_detections", c.num_detections},
                           {"ap", c.ap},
                           {"ap50", c.ap50()},
                           {"ap50_95", c.ap50_95},
                           {"precision", c.precision},
                           {"recall", c.recall},
                           {"pr_curve", std::move(curve)}});
        std::vector<std::string> row{std::to_string(c.class_id), std::to_string(c.num_gt),
                                     std::to_string(c.num_detections)};
        for (double v : c.ap)
            row.push_back(number(v));
        for (double v : {c.ap50_95, c.precision, c.recall})
            row.push_back(number(v));
        r.rows.push_back(std::move(row));
    }
    std::size_t total_gt = 0, total_det = 0;
    for (const ClassReport& c : rep.classes) {
        total_gt += c.num_gt;
        total_det += c.num_detections;
    }
    std::vector<std::string> all{"all", std::to_string(total_gt), std::to_string(total_det)};
    for (double v : rep.map_per_threshold)
        all.push_back(number(v));
    for (double v : {rep.map50_95, rep.precision, rep.recall})
        all.push_back(number(v));
    r.rows.push_back(std::move(all));

    r.json = {{"command", "eval"},
              {"num_images", rep.num_images},
              {"iou_thresholds", thresholds},
              {"conf_filter", a.conf ? Json(*a.conf) : Json(nullptr)},
              {"nms_iou", a.nms_iou ? Json(*a.nms_iou) : Json(nullptr)},
              {"map_per_threshold", rep.map_per_threshold},
              {"map50", rep.map50},
              {"map50_95", rep.map50_95},
              {"operating_point",
               {{"iou", rep.operating_iou},
                {"confidence", rep.operating_confidence},
                {"precision", rep.precision},
                {"recall", rep.recall},
                {"f1", rep.f1}}},
              {"classes", std::move(classes)}};
    if (a.throughput_reps > 0)
        r.json["throughput"] = {{"repetitions", a.throughput_reps},
                                {"samples_per_second", measure_throughput(samples, a.throughput_reps)}};
    return r;
}

// stats -----------------------------------------------------------------

struct StatsArgs
{
    std::string gt_dir;
    std::string manifest;
    std::string names;
};

double percent(std::size_t part, std::size_t whole)
{
    return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

Rendered run_stats(const StatsArgs& a)
{
    std::vector<std::string> names;
    if (!a.names.empty()) {
        std::stringstream ss(a.names);
        std::string item;
        while (std::getline(ss, item, ','))
            names.push_back(item);
    }
    auto name_of = [&](int id) {
        return id >= 0 && static_cast<std::size_t>(id) < names.size() ? names[static_cast<std::size_t>(id)]
                                                                       : std::to_string(id);
    };

    const auto manifest = parse_manifest(read_text(a.manifest));
    const DatasetSummary sum = summarize(load_label_dir(a.gt_dir, manifest, false));

    Rendered r;
    r.header = {"class", "samples", "occluded", "occluded_percent"};
    Json classes = Json::array();
    for (const auto& [id, counts] : sum.classes) {
        classes.push_back({{"class_id", id},
                           {"name", name_of(id)},
                           {"total", counts.total},
                           {"occluded", counts.occluded},
                           {"occluded_percent", percent(counts.occluded, counts.total)}});
        r.rows.push_back({name_of(id), std::to_string(counts.total), std::to_string(counts.occluded),
                          number(percent(counts.occluded, counts.total))});
    }
    r.rows.push_back({"total", std::to_string(sum.total), std::to_string(sum.occluded),
                      number(percent(sum.occluded, sum.total))});

    r.json = {{"command", "stats"},
              {"num_images", sum.num_images},
              {"occlusion_band", {{"low", kOcclusionLow}, {"high", kOcclusionHigh}}},
              {"classes", std::move(classes)},
              {"total", sum.total},
              {"occluded", sum.occluded},
              {"occluded_percent", percent(sum.occluded, sum.total)}};
    return r;
}

void print_usage(std::ostream& err, const CLI::App& app)
{
    const CLI::App* target = &app;
    for (const CLI::App* sub : app.get_subcommands())
        target = sub;
    err << target->help();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Box-regression losses, ECA attention, NMS, detection evaluation and occlusion statistics",
                 args.empty() ? "yoloea" : std::filesystem::path(args.front()).filename().string()};
    app.require_subcommand(1);

    std::string format_name = "json";
    app.add_option("--format", format_name, "Output format")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->capture_default_str();

    const std::vector<std::string> kinds{"iou", "giou", "eiou"};

    LossArgs loss_args;
    auto* loss = app.add_subcommand("loss", "Loss value (and gradient) for one predicted/ground-truth pair");
    loss->add_option("--kind", loss_args.kind, "Loss kind")->check(CLI::IsMember(kinds))->capture_default_str();
    loss->add_option("--pred", loss_args.pred, "Predicted box x1,y1,x2,y2")->required();
    loss->add_option("--gt", loss_args.gt, "Ground-truth box x1,y1,x2,y2")->required();
    loss->add_flag("--grad", loss_args.grad, "Also report the analytic gradient");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Gradient-descent fit of a predicted box onto a ground-truth box");
    fit->add_option("--kind", fit_args.kind, "Loss kind")->check(CLI::IsMember(kinds))->capture_default_str();
    fit->add_option("--init", fit_args.init, "Initial predicted box x1,y1,x2,y2")->required();
    fit->add_option("--gt", fit_args.gt, "Ground-truth box x1,y1,x2,y2")->required();
    fit->add_option("--lr", fit_args.lr, "Initial step size per iteration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit->add_option("--steps", fit_args.steps, "Maximum accepted steps")
        ->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))
        ->capture_default_str();
    fit->add_option("--stride", fit_args.stride, "Record every N-th accepted step (the last is always kept)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))
        ->capture_default_str();

    EcaArgs eca_args;
    auto* eca = app.add_subcommand("eca", "ECA forward pass on a seeded random map plus a gradient check");
    eca->add_option("--shape", eca_args.shape, "Feature map shape n,c,h,w")->required();
    eca->add_option("--seed", eca_args.seed, "Random seed for input and kernel")->capture_default_str();
    eca->add_option("--gamma", eca_args.gamma, "Kernel-size gamma")
        ->check(CLI::Range(1, 1000))
        ->capture_default_str();
    eca->add_option("--b", eca_args.b, "Kernel-size offset b")->check(CLI::Range(0, 1000))->capture_default_str();
    eca->add_option("--kernel", eca_args.kernel, "Override the adaptive kernel size (odd)")
        ->check(CLI::Range(1, 1'000'001));
    eca->add_option("--weights-out", eca_args.weights_out, "Write the kernel weights as JSON");
    eca->add_option("--check-samples", eca_args.check_samples, "Input coordinates checked by finite differences")
        ->capture_default_str();
    eca->add_option("--fd-step", eca_args.fd_step, "Central difference step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    NmsArgs nms_args;
    auto* nms_cmd = app.add_subcommand("nms", "Confidence filter and class-wise NMS on a prediction file");
    nms_cmd->add_option("--pred-file", nms_args.pred_file, "YOLO prediction file (class cx cy w h conf)")
        ->required()
        ->check(CLI::ExistingFile);
    nms_cmd->add_option("--iou", nms_args.iou, "NMS IoU threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    nms_cmd->add_option("--conf", nms_args.conf, "Confidence threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    nms_cmd->add_option("--image-size", nms_args.image_size, "Image width,height for pixel output")
        ->capture_default_str();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "COCO-style evaluation of prediction files against ground truth");
    eval->add_option("--gt-dir", eval_args.gt_dir, "Directory of ground-truth label files")->required();
    eval->add_option("--pred-dir", eval_args.pred_dir, "Directory of prediction files")->required();
    eval->add_option("--manifest", eval_args.manifest, "CSV image_id,width,height")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--operating-iou", eval_args.operating_iou, "IoU threshold of the precision/recall point")
        ->check(CLI::Range(0.01, 1.0))
        ->capture_default_str();
    eval->add_option("--conf", eval_args.conf, "Drop detections below this confidence first")
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--nms-iou", eval_args.nms_iou, "Apply class-wise NMS per image first")
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--throughput-reps", eval_args.throughput_reps,
                     "Also time this many evaluation passes (output is then run-dependent)");

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "Per-class sample and occlusion counts of a ground-truth set");
    stats->add_option("--gt-dir", stats_args.gt_dir, "Directory of ground-truth label files")->required();
    stats->add_option("--manifest", stats_args.manifest, "CSV image_id,width,height")
        ->required()
        ->check(CLI::ExistingFile);
    stats->add_option("--names", stats_args.names, "Comma-separated class names by id");

    std::vector<const char*> argv;
    for (const std::string& a : args)
        argv.push_back(a.c_str());
    if (argv.empty())
        argv.push_back("yoloea");

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        print_usage(err, app);
        return kExitUsage;
    }

    const OutputFormat format = format_name == "csv"     ? OutputFormat::Csv
                                : format_name == "table" ? OutputFormat::Table
                                                         : OutputFormat::Json;
    try {
        Rendered result;
        if (loss->parsed())
            result = run_loss(loss_args);
        else if (fit->parsed())
            result = run_fit(fit_args);
        else if (eca->parsed())
            result = run_eca(eca_args);
        else if (nms_cmd->parsed())
            result = run_nms(nms_args);
        else if (eval->parsed())
            result = run_eval(eval_args);
        else
            result = run_stats(stats_args);
        emit(out, format, result);
        return kExitOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n";
        print_usage(err, app);
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace yoloea::cli
