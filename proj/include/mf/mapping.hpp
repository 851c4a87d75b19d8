#pragma once

#include <string>
#include <vector>

#include "mf/analytic.hpp"
#include "mf/market_data.hpp"

namespace mf {

// Per-expiry digital-mapping parameters; Black is {m=0, lambda=1}, DD is
// {lambda=1, m != 0}.  Index n-1 holds the parameters for expiry T_n.
struct MappingModel {
    std::vector<UVDDParams> params;
};

// The eight standard pricing variants (CLI --case): per expiry, (m, lambda,
// omega) fixed case-wide and sigma1 solved so the model ATM price equals the
// Black ATM price off the quoted surface.  Case 1 uses the quoted vol as is.
MappingModel make_case_model(const CoterminalDeal& deal, int case_id);

// Same ATM re-anchoring for externally supplied per-expiry (m, lambda, omega)
// shapes (calibration output, synthetic smiles); sigma1 of each entry is
// re-solved, sigma2 keeps its ratio to sigma1.
MappingModel make_atm_anchored_model(const CoterminalDeal& deal,
                                     const std::vector<UVDDParams>& shapes);

struct MappedDate {
    double sigma0 = 0.0;          // stdev of X at this date
    std::vector<double> x;        // driver grid
    std::vector<double> R;        // P_n(x) / D_{N+1}(x)
    std::vector<double> S;        // swap-rate functional S_n(x)
    std::vector<double> D_end;    // numeraire bond D_{N+1}(x)
    std::vector<double> L;        // libor fixed here for the coming period
    std::vector<double> digital;  // scaled digital at the nodes (diagnostic)
};

// Backward-induction construction of the functional forms on a lattice:
// R propagated by conditional expectation from the terminal date, S from
// inverting the market digital of each expiry, D_end = 1/(1+S*R).
class MappedLattice {
public:
    MappedLattice(const CoterminalDeal& deal, const MappingModel& model,
                  double mean_reversion, const GridParams& grid);

    int periods() const { return static_cast<int>(dates_.size()); }
    const CoterminalDeal& deal() const { return deal_; }
    const MappingModel& model() const { return model_; }
    const GridParams& grid_params() const { return grid_; }
    double mean_reversion() const { return a_; }

    // 1-based date access matching the T_n labels; n in 1..N.
    const MappedDate& date(int n) const;

    // Model time of T_n (n=0 means the valuation date).
    double time_of(int n) const;
    // Conditional variance of X between dates n0 < n1 (n0=0 for today).
    double variance_between(int n0, int n1) const;

    // Discount bond D_k seen at date n for every node x: k in n..N+1 where
    // k = N+1 is the numeraire bond itself and k = n the maturing bond.
    std::vector<double> reconstruct_bond(int k, int n) const;

    struct Diagnostics {
        double max_pvbp_err = 0.0;  // relative, vs curve P_n(0)
        double max_bond_err = 0.0;  // relative, vs curve D_n(0)
        long clamped_nodes = 0;     // digital ratios clipped at machine limits
    };
    const Diagnostics& diagnostics() const { return diag_; }

    std::string to_json() const;
    static MappedLattice from_json(const std::string& text);

private:
    MappedLattice() = default;
    void build();

    CoterminalDeal deal_;
    MappingModel model_;
    double a_ = 0.0;
    GridParams grid_;
    std::vector<MappedDate> dates_;
    Diagnostics diag_;
};

}  // namespace mf
