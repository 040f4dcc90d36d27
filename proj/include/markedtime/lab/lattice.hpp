#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace markedtime::lab {

using Rational = mpq_class;

enum class JumpMode { at_most_one, unrestricted };

/// One path of the lattice: bit t-1 of `walk` is set when step t goes up,
/// bit t-1 of `jumps` when a jump happens at step t.
struct Path {
    std::uint32_t walk = 0;
    std::uint32_t jumps = 0;
};

enum class TauKind { deterministic, first_jump, walk_hit, hybrid, never };

/// Default time as a function of the path. Values lie in 1..n, or n + 1 for
/// "no default by n".
struct TauRule {
    TauKind kind = TauKind::first_jump;
    int time = 1;   // deterministic
    int level = 1;  // walk_hit / hybrid: first t with walk sum <= -level

    int evaluate(const Path& path, int n_steps) const;
    std::string describe() const;
};

template <class T>
struct LatticeModel {
    using Kernel = std::function<std::vector<T>(const Path&)>;

    int n_steps = 1;
    T scale = T(1);
    T jump_probability = T(0);
    JumpMode jump_mode = JumpMode::at_most_one;
    int n_marks = 2;
    /// Row of mark probabilities K(path, .) for every path.
    Kernel kernel;
    TauRule tau;

    /// Structural problems (sizes, probabilities). Kernel positivity is
    /// checked when the space is built.
    std::vector<std::string> problems() const;
};

inline constexpr int kMaxSteps = 12;
inline constexpr int kMaxMarks = 5;
inline constexpr std::size_t kMaxAtoms = 10'000'000;
/// Absolute tolerance standing in for "exactly zero" in double mode.
inline constexpr double kDoubleTolerance = 1e-10;

/// Thrown for invalid models; the message starts with the first problem.
class LatticeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The finite probability space of a LatticeModel with cached partitions:
/// paths carry P(path); atoms (path, x) carry P(path) K(path, x). Atom index
/// is path_index * n_marks + x.
template <class T>
class LatticeSpace {
public:
    /// With `require_positive_kernel` false a kernel with zero entries is
    /// accepted (used to show what breaks without the positivity hypothesis).
    explicit LatticeSpace(LatticeModel<T> model, bool require_positive_kernel = true);

    const LatticeModel<T>& model() const { return model_; }
    int n() const { return model_.n_steps; }
    int marks() const { return model_.n_marks; }
    std::size_t n_paths() const { return paths_.size(); }
    std::size_t n_atoms() const { return paths_.size() * model_.n_marks; }

    const Path& path(std::size_t i) const { return paths_[i]; }
    const T& path_prob(std::size_t i) const { return path_prob_[i]; }
    const T& kernel(std::size_t i, int x) const { return kernel_[i * marks() + x]; }
    const T& eta(int x) const { return eta_[x]; }
    const T& atom_prob(std::size_t a) const { return atom_prob_[a]; }
    int tau(std::size_t i) const { return tau_[i]; }
    std::size_t atom_path(std::size_t a) const { return a / marks(); }
    int atom_mark(std::size_t a) const { return static_cast<int>(a % marks()); }

    /// Step t in 1..n: +1 / -1.
    int walk_step(std::size_t i, int t) const { return (paths_[i].walk >> (t - 1)) & 1u ? 1 : -1; }
    int jump_at(std::size_t i, int t) const { return (paths_[i].jumps >> (t - 1)) & 1u; }

    /// F_t classes of paths (prefix of length t).
    const std::vector<int>& f_group(int t) const { return f_group_[t]; }
    int f_groups(int t) const { return f_count_[t]; }
    /// G_t classes of atoms: prefix plus the mark once tau <= t.
    const std::vector<int>& g_group(int t) const { return g_group_[t]; }
    int g_groups(int t) const { return g_count_[t]; }

    /// E[X | F_t] under P for a path-indexed X.
    std::vector<T> f_cond(const std::vector<T>& values, int t) const;
    /// E[X | G_t] for atom-indexed X under the atom weights `probs`.
    std::vector<T> g_cond(const std::vector<T>& values, int t, const std::vector<T>& probs) const;
    /// True when X takes one value on every F_t class.
    bool f_measurable(const std::vector<T>& values, int t) const;
    bool g_measurable(const std::vector<T>& values, int t) const;

    /// p_t(x) on path i: P(G = x | F_t) / eta(x).
    const T& density(int t, std::size_t i, int x) const { return density_[t][i * marks() + x]; }

    const std::vector<T>& atom_probs() const { return atom_prob_; }

private:
    LatticeModel<T> model_;
    std::vector<Path> paths_;
    std::vector<T> path_prob_, kernel_, eta_, atom_prob_;
    std::vector<int> tau_;
    std::vector<std::vector<int>> f_group_, g_group_;
    std::vector<int> f_count_, g_count_;
    std::vector<std::vector<T>> density_;
};

/// Path-indexed process table: values[t][path], t = 0..n.
template <class T>
using PathProcess = std::vector<std::vector<T>>;
/// Atom-indexed process table: values[t][atom].
template <class T>
using AtomProcess = std::vector<std::vector<T>>;

template <class T>
double to_double(const T& v);

template <class T>
T abs_value(const T& v);

extern template class LatticeSpace<Rational>;
extern template class LatticeSpace<double>;

}  // namespace markedtime::lab
