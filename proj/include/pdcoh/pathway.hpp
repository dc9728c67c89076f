#pragma once

#include "pdcoh/common.hpp"

namespace pdcoh {

// Traversal times and extra phases of one down-conversion alternative.
struct Pathway {
    double tau_p = 0.0, tau_s = 0.0, tau_i = 0.0;
    double phi_p = 0.0, phi_s = 0.0, phi_i = 0.0;

    double tau() const { return tau_p + 0.5 * (tau_s + tau_i); }
    double tau_prime() const { return 0.5 * (tau_s - tau_i); }
    double phi() const { return phi_p + phi_s + phi_i; }

    void validate() const {
        require_finite(tau_p, "tau_p");
        require_finite(tau_s, "tau_s");
        require_finite(tau_i, "tau_i");
        require_finite(phi_p, "phi_p");
        require_finite(phi_s, "phi_s");
        require_finite(phi_i, "phi_i");
    }
};

struct PathwayDeltas {
    double dtau = 0.0;        // tau_1 - tau_2, symmetric (Franson) delay
    double dtau_prime = 0.0;  // tau'_1 - tau'_2, antisymmetric (HOM) delay
    double dphi = 0.0;        // phi_1 - phi_2
};

// The two interfering alternatives of a two-photon path diagram.
struct PathwayPair {
    Pathway alt1, alt2;

    void validate() const {
        alt1.validate();
        alt2.validate();
    }

    const Pathway& alternative(int j) const {
        if (j != 1 && j != 2) throw std::domain_error("alternative must be 1 or 2");
        return j == 1 ? alt1 : alt2;
    }

    PathwayPair swapped() const { return {alt2, alt1}; }

    PathwayDeltas deltas() const {
        return {alt1.tau() - alt2.tau(),
                alt1.tau_prime() - alt2.tau_prime(),
                alt1.phi() - alt2.phi()};
    }
};

inline PathwayDeltas pathway_deltas(const PathwayPair& paths) {
    paths.validate();
    return paths.deltas();
}

}  // namespace pdcoh
