#include "freqlat/state.hpp"

namespace freqlat {

SingleExcitationState SingleExcitationState::vacuum(int n_modes) {
    SingleExcitationState s;
    s.c_vac = 1.0;
    s.c_modes = Eigen::VectorXcd::Zero(n_modes);
    return s;
}

SingleExcitationState SingleExcitationState::excited_qubit(int n_modes) {
    SingleExcitationState s;
    s.c_q = 1.0;
    s.c_modes = Eigen::VectorXcd::Zero(n_modes);
    return s;
}

SingleExcitationState SingleExcitationState::single_mode(const ModeLattice& lattice, int m) {
    SingleExcitationState s;
    s.c_modes = Eigen::VectorXcd::Zero(lattice.site_count());
    s.c_modes(lattice.row(m)) = 1.0;
    return s;
}

SingleExcitationState reset_qubit(const SingleExcitationState& state) {
    SingleExcitationState out = state;
    out.p_lost += std::norm(out.c_q);
    out.c_q = 0.0;
    return out;
}

} // namespace freqlat
