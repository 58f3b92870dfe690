#pragma once

#include <string>
#include <vector>

#include "tdh/signature.hpp"

namespace tdh::fingerprint {

struct Fingerprint {
    std::string board_id;
    signature::SignatureMap template_map;  // element-wise median of the enrollment sweeps
    double intra_mean = 0.0;               // pairwise enrollment score statistics
    double intra_deviation = 0.0;

    // Open-set acceptance threshold: mean - 3*deviation, floored at 0.6.
    double threshold() const;
};

struct RankedScore {
    std::string board_id;
    double score = 0.0;
};

struct MatchReport {
    std::string query_id;
    std::vector<RankedScore> ranked;  // descending
    bool known = false;
    std::string matched_id;  // set when known
    double threshold_used = 0.0;
};

class FingerprintDb {
public:
    const std::vector<Fingerprint>& fingerprints() const { return entries_; }
    const Fingerprint* find(const std::string& board_id) const;
    void add(Fingerprint fp);  // throws DuplicateId
    bool empty() const { return entries_.empty(); }

    void save(const std::string& path) const;
    static FingerprintDb load(const std::string& path);

private:
    std::vector<Fingerprint> entries_;
};

// Similarity in [0, 1]: cosine of floor-clipped rows, averaged over the
// shared bias grid.  Rows sitting at the floor in both maps are skipped; a
// row active in exactly one map scores 0.  Symmetric; 1.0 iff the active rows
// are positively proportional after clipping.  Throws GridMismatch when the
// frequency spans or bias grids are incompatible.
double match_score(const signature::SignatureMap& a, const signature::SignatureMap& b,
                   double noise_floor_dbm);

// Build a fingerprint from >= 3 enrollment sweeps (distinct seeds) and add it
// to the database.
Fingerprint enroll(FingerprintDb& db, const std::string& board_id,
                   const std::vector<signature::SignatureMap>& sweeps, double noise_floor_dbm);

// Rank every enrolled fingerprint against the query; decide Known/Unknown by
// the top fingerprint's threshold.  Throws EmptyDatabase.
MatchReport identify(const FingerprintDb& db, const signature::SignatureMap& query,
                     double noise_floor_dbm);

// 1 - match_score(template, after): how far a board has drifted from its
// enrolled signature.
double tamper_delta(const Fingerprint& before, const signature::SignatureMap& after,
                    double noise_floor_dbm);

}  // namespace tdh::fingerprint
