#pragma once

#include "cusparity/continuation.hpp"
#include "cusparity/family.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cusparity {

enum class OpposedMethod { flow_orientation, potential_slope };

std::string_view to_string(OpposedMethod m);
OpposedMethod opposed_method_from_string(std::string_view s);

/// A run of equilibria of one stability class on the S/Z branch.
struct BoundaryArc {
    StabilityClass stability;
    std::vector<BranchPoint> points;
};

struct EdgeScan {
    Edge edge = Edge::right;
    std::vector<Branch> branches;
};

struct SZReport {
    Branch edge_branch;
    /// x1 then x2, in order along the S/Z edge.
    std::vector<FoldPoint> folds;
    /// attractor arc, saddle arc, attractor arc.
    std::vector<BoundaryArc> components;
    bool opposed = false;
    OpposedMethod opposed_method = OpposedMethod::flow_orientation;
    /// Flow-orientation answer, kept for comparison on gradient families.
    std::optional<bool> opposed_by_flow;
    bool other_edges_clean = false;
    std::vector<EdgeScan> edges;

    const BoundaryArc& saddle_arc() const { return components.at(1); }
};

/// Continues equilibria around the box boundary and checks the S/Z
/// structure. Throws SZViolation.
SZReport boundary_scan(const FamilySpec& f, const Settings& s);

/// Opposedness of the two boundary folds. Throws TransportBroken.
bool opposed_folds(const SZReport& sz, const FamilySpec& f, const Settings& s, OpposedMethod method);

/// Sampled 1-saddle equilibria over a parameter grid, grouped into
/// connected components.
class SaddleCloud {
public:
    struct Node {
        Vec x;
        Param theta = Param::Zero();
        int gi = 0, gj = 0;
    };

    SaddleCloud(const FamilySpec& f, const Settings& s, int grid);

    int grid() const { return grid_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    int component(int node) const;
    /// Cloud node reached by lifting the 1-saddle (x, theta) to a nearby grid
    /// node, if any.
    std::optional<int> attach(const Vec& x, const Param& theta) const;
    /// Node indices of a path of adjacent nodes, empty when disconnected.
    std::vector<int> path(int from, int to) const;

private:
    int find(int i) const;

    const FamilySpec* f_;
    Settings s_;
    int grid_;
    std::vector<Node> nodes_;
    std::vector<std::vector<int>> at_;  // node indices per grid cell
    std::vector<std::vector<int>> adjacent_;
    mutable std::vector<int> parent_;
};

struct MembershipEvidence {
    int curve_id = 0;
    bool member = false;
    /// Fold point whose saddle side produced the decision, -1 if none.
    int fold_index = -1;
    /// (x, theta) points of 1-saddles linking the fold to the saddle arc.
    std::vector<std::pair<Vec, Param>> witness;
    int resolution = 0;
    std::string note;
};

/// Decides whether the 1-saddle side of a fold curve lies in the saddle
/// component containing the boundary saddle arc. Throws
/// InconclusiveMembership.
MembershipEvidence saddle_component_membership(const FamilySpec& f, const FoldCurveRecord& curve,
                                               const SZReport& sz, const Settings& s);
MembershipEvidence saddle_component_membership(const FamilySpec& f, const FoldCurveRecord& curve,
                                               const SZReport& sz, const Settings& s, const SaddleCloud& cloud);

struct CuspTally {
    int total = 0;
    int bt = 0;
    std::vector<std::pair<int, int>> per_curve;  // (curve id, cusps)
};

CuspTally count_cusps(const std::vector<FoldCurveRecord>& members);

/// Sign changes of the stored fold orientation along a curve.
int orientation_switches(const std::vector<FoldPoint>& points);

struct Traversal {
    int switch_count = 0;
    /// Orientation mismatch met when returning to x1 along the saddle arc.
    bool closure_discontinuity = false;
};

/// Walks the main curve from x1 to x2 counting orientation switches, then
/// returns along the saddle arc. Throws TransportBroken.
Traversal traversal_switch_count(const FamilySpec& f, const FoldCurveRecord& main_curve, const SZReport& sz,
                                 const Settings& s);

enum class Parity { odd, even };
std::string_view to_string(Parity p);

struct ParityVerdict {
    bool fh_found = false;
    std::vector<Codim2Point> fh_points;
    std::vector<MembershipEvidence> membership;
    std::vector<int> member_ids;
    int cusp_count_total = 0;
    int bt_count = 0;
    Parity parity = Parity::even;
    std::optional<int> main_curve_id;
    std::optional<int> switch_count;
    std::optional<bool> closure_discontinuity;
    bool theorem_satisfied = false;
    int scan_grid = 0;
    int membership_grid = 0;
    std::vector<std::string> notes;
};

/// Everything a full run produces.
struct PipelineResult {
    SZReport sz;
    std::vector<FoldCurveRecord> curves;
    ParityVerdict verdict;
};

/// Boundary scan, fold-curve enumeration, membership, counting and the
/// traversal cross-check. Throws SZViolation, InconclusiveMembership and
/// CrossCheckFailure.
PipelineResult run_pipeline(const FamilySpec& f, const Settings& s);
ParityVerdict theorem_verdict(const FamilySpec& f, const Settings& s);

} // namespace cusparity
