#include "tdh/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "tdh/errors.hpp"
#include "tdh/kernels.hpp"

namespace tdh::fingerprint {

namespace {

constexpr int kDbSchemaVersion = 1;

// Bias values matched at microvolt resolution.
std::int64_t bias_key(double v) { return std::llround(v * 1e6); }

bool spans_compatible(const signature::SignatureMap& a, const signature::SignatureMap& b) {
    if (a.cols() == 0 || b.cols() == 0) return false;
    const double tol_a = 2.0 * (a.frequency_hz.back() - a.frequency_hz.front()) /
                         static_cast<double>(a.cols());
    return std::fabs(a.frequency_hz.front() - b.frequency_hz.front()) <= tol_a &&
           std::fabs(a.frequency_hz.back() - b.frequency_hz.back()) <= tol_a;
}

// Linear interpolation of a power row onto a target frequency grid.
std::vector<double> resample_row(const std::vector<double>& src_freq, const double* src_power,
                                 const std::vector<double>& dst_freq) {
    std::vector<double> out(dst_freq.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < dst_freq.size(); ++i) {
        const double f = dst_freq[i];
        while (j + 1 < src_freq.size() && src_freq[j + 1] < f) ++j;
        if (f <= src_freq.front()) {
            out[i] = src_power[0];
        } else if (f >= src_freq.back()) {
            out[i] = src_power[src_freq.size() - 1];
        } else {
            const double f0 = src_freq[j], f1 = src_freq[j + 1];
            const double t = (f - f0) / (f1 - f0);
            out[i] = (1.0 - t) * src_power[j] + t * src_power[j + 1];
        }
    }
    return out;
}

nlohmann::json map_to_json(const signature::SignatureMap& m) {
    return {{"board_id", m.board_id},
            {"bias_v", m.bias_v},
            {"frequency_hz", m.frequency_hz},
            {"power_dbm", m.power_dbm},
            {"faulted_rows", m.faulted_rows},
            {"provenance",
             {{"config_hash", m.provenance.config_hash}, {"seed", m.provenance.seed}}}};
}

signature::SignatureMap map_from_json(const nlohmann::json& j) {
    signature::SignatureMap m;
    try {
        j.at("bias_v").get_to(m.bias_v);
        j.at("frequency_hz").get_to(m.frequency_hz);
        j.at("power_dbm").get_to(m.power_dbm);
        m.board_id = j.value("board_id", "");
        if (j.contains("faulted_rows")) j.at("faulted_rows").get_to(m.faulted_rows);
        if (j.contains("provenance")) {
            m.provenance.config_hash = j.at("provenance").value("config_hash", "");
            m.provenance.seed = j.at("provenance").value("seed", std::uint64_t{0});
        }
    } catch (const std::exception& e) {
        throw SchemaError("fingerprints.template", e.what());
    }
    if (m.power_dbm.size() != m.bias_v.size() * m.frequency_hz.size())
        throw SchemaError("fingerprints.template.power_dbm", "matrix dimensions mismatch");
    return m;
}

}  // namespace

double Fingerprint::threshold() const {
    return std::max(intra_mean - 3.0 * intra_deviation, 0.6);
}

const Fingerprint* FingerprintDb::find(const std::string& board_id) const {
    for (const auto& fp : entries_)
        if (fp.board_id == board_id) return &fp;
    return nullptr;
}

void FingerprintDb::add(Fingerprint fp) {
    if (find(fp.board_id)) throw DuplicateId("board_id already enrolled: " + fp.board_id);
    entries_.push_back(std::move(fp));
}

void FingerprintDb::save(const std::string& path) const {
    nlohmann::json j;
    j["schema_version"] = kDbSchemaVersion;
    auto& arr = j["fingerprints"] = nlohmann::json::array();
    for (const auto& fp : entries_) {
        arr.push_back({{"board_id", fp.board_id},
                       {"template", map_to_json(fp.template_map)},
                       {"intra_mean", fp.intra_mean},
                       {"intra_deviation", fp.intra_deviation}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(1) << "\n";
}

FingerprintDb FingerprintDb::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(path, std::string("invalid JSON: ") + e.what());
    }
    const int version = j.value("schema_version", 0);
    if (version != kDbSchemaVersion)
        throw SchemaError("schema_version", "unsupported version " + std::to_string(version));
    FingerprintDb db;
    for (const auto& e : j.value("fingerprints", nlohmann::json::array())) {
        Fingerprint fp;
        fp.board_id = e.value("board_id", "");
        if (fp.board_id.empty()) throw SchemaError("fingerprints.board_id", "missing");
        fp.template_map = map_from_json(e.at("template"));
        fp.intra_mean = e.value("intra_mean", 0.0);
        fp.intra_deviation = e.value("intra_deviation", 0.0);
        db.add(std::move(fp));
    }
    return db;
}

double match_score(const signature::SignatureMap& a, const signature::SignatureMap& b,
                   double noise_floor_dbm) {
    if (a.cols() == 0 || b.cols() == 0 || a.rows() == 0 || b.rows() == 0)
        throw GridMismatch("empty signature map");
    if (!spans_compatible(a, b)) throw GridMismatch("frequency spans differ");

    const bool same_grid = a.cols() == b.cols();

    // Shared bias rows, matched at 1 uV.
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    {
        std::size_t ja = 0, jb = 0;
        while (ja < a.rows() && jb < b.rows()) {
            const auto ka = bias_key(a.bias_v[ja]);
            const auto kb = bias_key(b.bias_v[jb]);
            if (ka == kb) {
                shared.emplace_back(ja, jb);
                ++ja;
                ++jb;
            } else if (ka < kb) {
                ++ja;
            } else {
                ++jb;
            }
        }
    }
    if (shared.empty()) throw GridMismatch("no shared bias rows");

    const std::size_t n = a.cols();
    std::vector<double> xa(n), xb(n), resampled;
    double acc = 0.0;
    std::size_t counted = 0;
    for (const auto& [ra, rb] : shared) {
        const double* pa = &a.power_dbm[ra * a.cols()];
        const double* pb_src = &b.power_dbm[rb * b.cols()];
        const double* pb = pb_src;
        if (!same_grid) {
            resampled = resample_row(b.frequency_hz, pb_src, a.frequency_hz);
            pb = resampled.data();
        }
        kernels::clip_shift(std::span<const double>(pa, n), noise_floor_dbm, xa);
        kernels::clip_shift(std::span<const double>(pb, n), noise_floor_dbm, xb);
        const double na = kernels::dot(xa, xa);
        const double nb = kernels::dot(xb, xb);
        const bool active_a = na > 1e-12;
        const bool active_b = nb > 1e-12;
        if (!active_a && !active_b) continue;  // both at the floor: uninformative
        ++counted;
        if (active_a && active_b)
            acc += kernels::dot(xa, xb) / std::sqrt(na * nb);
        // exactly one active: contributes 0
    }
    if (counted == 0) return 0.0;
    const double score = acc / static_cast<double>(counted);
    return std::clamp(score, 0.0, 1.0);
}

Fingerprint enroll(FingerprintDb& db, const std::string& board_id,
                   const std::vector<signature::SignatureMap>& sweeps,
                   double noise_floor_dbm) {
    if (db.find(board_id)) throw DuplicateId("board_id already enrolled: " + board_id);
    if (sweeps.size() < 3) throw TooFewSweeps("enrollment needs >= 3 sweeps");
    const std::size_t rows = sweeps[0].rows(), cols = sweeps[0].cols();
    for (const auto& s : sweeps)
        if (s.rows() != rows || s.cols() != cols)
            throw GridMismatch("enrollment sweeps must share one grid");

    Fingerprint fp;
    fp.board_id = board_id;
    fp.template_map = sweeps[0];
    fp.template_map.board_id = board_id;
    fp.template_map.faulted_rows.clear();
    fp.template_map.provenance.seed = 0;

    // Element-wise median: robust to a single faulted row in one sweep.
    std::vector<double> cell(sweeps.size());
    for (std::size_t i = 0; i < rows * cols; ++i) {
        for (std::size_t s = 0; s < sweeps.size(); ++s) cell[s] = sweeps[s].power_dbm[i];
        std::sort(cell.begin(), cell.end());
        const std::size_t mid = cell.size() / 2;
        fp.template_map.power_dbm[i] =
            (cell.size() % 2) ? cell[mid] : 0.5 * (cell[mid - 1] + cell[mid]);
    }

    std::vector<double> scores;
    for (std::size_t i = 0; i < sweeps.size(); ++i)
        for (std::size_t j = i + 1; j < sweeps.size(); ++j)
            scores.push_back(match_score(sweeps[i], sweeps[j], noise_floor_dbm));
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    // Sample variance: the handful of pairwise scores is a sample, not the
    // population.
    if (scores.size() > 1) var /= static_cast<double>(scores.size() - 1);
    fp.intra_mean = mean;
    fp.intra_deviation = std::sqrt(var);

    db.add(fp);
    return fp;
}

MatchReport identify(const FingerprintDb& db, const signature::SignatureMap& query,
                     double noise_floor_dbm) {
    if (db.empty()) throw EmptyDatabase("no fingerprints enrolled");
    MatchReport report;
    report.query_id = query.board_id;
    for (const auto& fp : db.fingerprints())
        report.ranked.push_back({fp.board_id, match_score(fp.template_map, query, noise_floor_dbm)});
    std::stable_sort(report.ranked.begin(), report.ranked.end(),
                     [](const RankedScore& x, const RankedScore& y) { return x.score > y.score; });
    const Fingerprint* top = db.find(report.ranked.front().board_id);
    report.threshold_used = top->threshold();
    if (report.ranked.front().score >= report.threshold_used) {
        report.known = true;
        report.matched_id = top->board_id;
    }
    return report;
}

double tamper_delta(const Fingerprint& before, const signature::SignatureMap& after,
                    double noise_floor_dbm) {
    return 1.0 - match_score(before.template_map, after, noise_floor_dbm);
}

}  // namespace tdh::fingerprint
