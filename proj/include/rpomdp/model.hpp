#pragma once

// Uncertain POMDP data model: interval transition functions, deterministic
// observations, observation-based memoryless policies and the uncertain Markov
// chain a policy induces.

#include <cstddef>
#include <string>
#include <vector>

namespace rpomdp {

using StateId = std::size_t;
using ActionId = std::size_t;
using ObsId = std::size_t;

/// Tolerance used for every "sums to one" check in the library.
inline constexpr double kDistributionTolerance = 1e-9;

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool is_point() const { return lower == upper; }
    bool contains(double value) const { return lower <= value && value <= upper; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct Successor {
    StateId state = 0;
    Interval prob;

    friend bool operator==(const Successor&, const Successor&) = default;
};

/// Successor list of one state-action pair (or of one chain state).
using SuccessorList = std::vector<Successor>;

/// Checks a successor list: positive lower bounds, lower <= upper <= 1, no
/// duplicate successors and sum(lower) <= 1 <= sum(upper). `where` prefixes
/// error messages.
void validate_successors(const SuccessorList& successors, std::size_t num_states,
                         const std::string& where);

/// Plain description used to construct an IntervalPomdp. Indexing is
/// transitions[s][a] and costs[s][a].
struct PomdpData {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t num_observations = 0;
    StateId initial = 0;
    std::vector<std::vector<SuccessorList>> transitions;
    std::vector<std::vector<double>> costs;
    std::vector<ObsId> observation;
    std::vector<StateId> targets;
    std::vector<StateId> goals;
};

/// Uncertain POMDP with interval transition probabilities. Immutable once
/// constructed; the constructor validates every invariant and throws on
/// violation.
class IntervalPomdp {
  public:
    explicit IntervalPomdp(PomdpData data);

    std::size_t num_states() const { return data_.num_states; }
    std::size_t num_actions() const { return data_.num_actions; }
    std::size_t num_observations() const { return data_.num_observations; }
    StateId initial() const { return data_.initial; }

    const SuccessorList& successors(StateId s, ActionId a) const { return data_.transitions[s][a]; }
    double cost(StateId s, ActionId a) const { return data_.costs[s][a]; }
    ObsId observation(StateId s) const { return data_.observation[s]; }

    /// State set labelled `target` in the model (may be empty).
    const std::vector<StateId>& targets() const { return data_.targets; }
    /// State set labelled `goal` in the model (may be empty).
    const std::vector<StateId>& goals() const { return data_.goals; }

    const PomdpData& data() const { return data_; }

    bool has_point_intervals() const;

    friend bool operator==(const IntervalPomdp& a, const IntervalPomdp& b);

  private:
    PomdpData data_;
};

enum class SpecKind { ReachAtLeast, ExpCostAtMost };

/// P>=lambda [F targets] or E<=kappa [F targets].
struct Specification {
    SpecKind kind = SpecKind::ReachAtLeast;
    double threshold = 0.0;
    std::vector<StateId> targets;

    static Specification reach(double lambda, std::vector<StateId> targets);
    static Specification cost(double kappa, std::vector<StateId> goals);

    bool is_reach() const { return kind == SpecKind::ReachAtLeast; }

    /// Throws ValidationError when the threshold is out of range or the
    /// target set is empty or refers to unknown states.
    void validate(std::size_t num_states) const;

    std::string to_string() const;
};

/// Observation-based memoryless randomized policy, probs[z][a].
class Policy {
  public:
    Policy() = default;
    explicit Policy(std::vector<std::vector<double>> probs) : probs_(std::move(probs)) {}

    static Policy uniform(std::size_t num_observations, std::size_t num_actions);

    std::size_t num_observations() const { return probs_.size(); }
    double prob(ObsId z, ActionId a) const { return probs_[z][a]; }
    const std::vector<double>& row(ObsId z) const { return probs_[z]; }
    const std::vector<std::vector<double>>& table() const { return probs_; }

    /// Checks shape, row sums and strict positivity against a model.
    void validate(std::size_t num_observations, std::size_t num_actions) const;

    friend bool operator==(const Policy&, const Policy&) = default;

  private:
    std::vector<std::vector<double>> probs_;
};

/// Uncertain Markov chain: per-state successor intervals and certain costs.
class IntervalMarkovChain {
  public:
    IntervalMarkovChain(StateId initial, std::vector<SuccessorList> transitions,
                        std::vector<double> costs);

    std::size_t num_states() const { return transitions_.size(); }
    StateId initial() const { return initial_; }
    const SuccessorList& successors(StateId s) const { return transitions_[s]; }
    double cost(StateId s) const { return costs_[s]; }

  private:
    StateId initial_;
    std::vector<SuccessorList> transitions_;
    std::vector<double> costs_;
};

/// Applies an observation-based policy. Chain intervals are the
/// policy-weighted sums of the per-action bounds; chain costs are the
/// policy-weighted action costs.
IntervalMarkovChain induce_chain(const IntervalPomdp& model, const Policy& policy);

/// Concrete probability per successor entry, aligned with the model's
/// successor lists: choice[s][a][k] is the probability of successors(s, a)[k].
using TransitionChoice = std::vector<std::vector<std::vector<double>>>;

/// Fixes one distribution per state-action pair inside its intervals and
/// returns the resulting point-interval model.
IntervalPomdp instantiate(const IntervalPomdp& model, const TransitionChoice& choice);

} // namespace rpomdp
