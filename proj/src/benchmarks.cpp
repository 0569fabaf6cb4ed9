#include "rpomdp/benchmarks.hpp"

#include "rpomdp/errors.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>

namespace rpomdp {

namespace {

constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {-1, 0, 1, 0};

void check_slip(Interval slip) {
    if (!(slip.lower > 0.0) || !(slip.lower <= slip.upper) || !(slip.upper <= 1.0))
        throw ValidationError("slip interval must satisfy 0 < lo <= hi <= 1");
}

// Sums intervals that land on the same successor.
class SuccessorBuilder {
  public:
    void add(StateId s, double lo, double hi) {
        auto& iv = merged_[s];
        iv.lower += lo;
        iv.upper += hi;
    }
    SuccessorList build() const {
        SuccessorList out;
        for (const auto& [s, iv] : merged_) {
            const double hi = std::min(1.0, iv.upper);
            out.push_back({s, {std::min(iv.lower, hi), hi}});
        }
        return out;
    }

  private:
    std::map<StateId, Interval> merged_;
};

// Maps arbitrary observation keys to dense ids in sorted key order.
std::vector<ObsId> densify(const std::vector<int>& keys, std::size_t& count) {
    std::vector<int> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    count = sorted.size();
    std::vector<ObsId> out;
    out.reserve(keys.size());
    for (int k : keys)
        out.push_back(static_cast<ObsId>(std::lower_bound(sorted.begin(), sorted.end(), k) -
                                         sorted.begin()));
    return out;
}

SuccessorList point_to(StateId s) { return {{s, {1.0, 1.0}}}; }

} // namespace

IntervalPomdp gen_grid(std::size_t width, std::size_t height, Interval slip,
                       const std::vector<Cell>& traps) {
    if (width < 2 || height < 2)
        throw ValidationError("grid dimensions must be at least 2x2");
    check_slip(slip);
    const double lat_lo = (1.0 - slip.upper) / 2.0;
    const double lat_hi = (1.0 - slip.lower) / 2.0;
    if (lat_lo == 0.0 && lat_hi > 0.0)
        throw ValidationError("slip interval with upper bound 1 must be a point");

    const std::size_t cells = width * height;
    const StateId placement = cells;
    const StateId sink = cells + 1;
    const StateId target = width - 1;
    std::vector<bool> is_trap(cells, false);
    for (const auto& c : traps) {
        if (c.x >= width || c.y >= height)
            throw ValidationError("trap cell outside the grid");
        const StateId s = c.y * width + c.x;
        if (s == target)
            throw ValidationError("trap covers the target cell");
        is_trap[s] = true;
    }

    PomdpData d;
    d.num_states = cells + 2;
    d.num_actions = 4;
    d.initial = placement;
    d.transitions.assign(d.num_states, std::vector<SuccessorList>(4));
    d.costs.assign(d.num_states, std::vector<double>(4, 0.0));
    d.targets = {target};

    std::vector<int> keys(d.num_states);
    std::vector<StateId> safe;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const StateId s = y * width + x;
            auto neighbour = [&](int dir) -> std::optional<StateId> {
                const long nx = static_cast<long>(x) + kDx[dir];
                const long ny = static_cast<long>(y) + kDy[dir];
                if (nx < 0 || ny < 0 || nx >= static_cast<long>(width) ||
                    ny >= static_cast<long>(height))
                    return std::nullopt;
                return static_cast<StateId>(ny) * width + static_cast<StateId>(nx);
            };
            if (s == target) {
                keys[s] = 17;
                for (ActionId a = 0; a < 4; ++a)
                    d.transitions[s][a] = point_to(s);
                continue;
            }
            if (is_trap[s]) {
                keys[s] = 18;
                for (ActionId a = 0; a < 4; ++a)
                    d.transitions[s][a] = point_to(sink);
                continue;
            }
            safe.push_back(s);
            int walls = 0;
            for (int dir = 0; dir < 4; ++dir)
                if (!neighbour(dir))
                    walls |= 1 << dir;
            keys[s] = walls;
            for (int a = 0; a < 4; ++a) {
                SuccessorBuilder b;
                b.add(neighbour(a).value_or(s), slip.lower, slip.upper);
                if (lat_hi > 0.0)
                    for (int lateral : {(a + 1) % 4, (a + 3) % 4})
                        b.add(neighbour(lateral).value_or(s), lat_lo, lat_hi);
                d.transitions[s][static_cast<ActionId>(a)] = b.build();
            }
        }
    keys[placement] = 16;
    keys[sink] = 18;
    const double share = 1.0 / static_cast<double>(safe.size());
    for (ActionId a = 0; a < 4; ++a) {
        for (StateId s : safe)
            d.transitions[placement][a].push_back({s, {share, share}});
        d.transitions[sink][a] = point_to(sink);
    }
    d.observation = densify(keys, d.num_observations);
    return IntervalPomdp(std::move(d));
}

std::vector<Cell> default_grid_traps() { return {{1, 1}, {2, 1}}; }

IntervalPomdp gen_grid(Interval slip) { return gen_grid(4, 4, slip, default_grid_traps()); }

namespace {

constexpr std::size_t kCorridor = 15;
constexpr std::size_t kShaftDepth = 2;

bool maze_open(long x, long y) {
    if (x < 0 || x >= static_cast<long>(kCorridor) || y < 0)
        return false;
    if (y == 0)
        return true;
    return x > 0 && x % 2 == 0 && y <= static_cast<long>(kShaftDepth);
}

} // namespace

StateId maze_state(Cell cell) {
    if (!maze_open(static_cast<long>(cell.x), static_cast<long>(cell.y)))
        throw ContractViolation("cell (" + std::to_string(cell.x) + ", " + std::to_string(cell.y) +
                                ") is not part of the maze");
    if (cell.y == 0)
        return cell.x;
    return kCorridor + kShaftDepth * (cell.x / 2 - 1) + cell.y - 1;
}

IntervalPomdp gen_maze(Interval slip) {
    check_slip(slip);
    PomdpData d;
    d.num_states = kMazePlacement + 1;
    d.num_actions = 4;
    d.initial = kMazePlacement;
    d.transitions.assign(d.num_states, std::vector<SuccessorList>(4));
    d.costs.assign(d.num_states, std::vector<double>(4, 0.0));
    d.goals = {kMazeGoal};
    std::vector<int> keys(d.num_states);

    std::vector<Cell> cells;
    for (std::size_t x = 0; x < kCorridor; ++x)
        cells.push_back({x, 0});
    for (std::size_t x = 2; x < kCorridor; x += 2)
        for (std::size_t y = 1; y <= kShaftDepth; ++y)
            cells.push_back({x, y});

    for (const Cell& c : cells) {
        const StateId s = maze_state(c);
        if (s == kMazeGoal) {
            keys[s] = 16;
            for (ActionId a = 0; a < 4; ++a)
                d.transitions[s][a] = point_to(s);
            continue;
        }
        int walls = 0;
        for (int a = 0; a < 4; ++a) {
            const long nx = static_cast<long>(c.x) + kDx[a];
            const long ny = static_cast<long>(c.y) + kDy[a];
            d.costs[s][static_cast<ActionId>(a)] = 1.0;
            if (!maze_open(nx, ny)) {
                walls |= 1 << a;
                d.transitions[s][static_cast<ActionId>(a)] = point_to(s);
                continue;
            }
            const StateId next =
                maze_state({static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)});
            SuccessorList list{{next, slip}};
            if (slip.lower < 1.0)
                list.push_back({s, {1.0 - slip.upper, 1.0 - slip.lower}});
            if (list.size() == 2 && list[1].prob.lower == 0.0)
                throw ValidationError("slip interval with upper bound 1 must be a point");
            d.transitions[s][static_cast<ActionId>(a)] = std::move(list);
        }
        keys[s] = walls;
    }

    keys[kMazePlacement] = 17;
    const double share = 1.0 / static_cast<double>(cells.size() - 1);
    for (ActionId a = 0; a < 4; ++a)
        for (const Cell& c : cells)
            if (maze_state(c) != kMazeGoal)
                d.transitions[kMazePlacement][a].push_back({maze_state(c), {share, share}});
    d.observation = densify(keys, d.num_observations);
    return IntervalPomdp(std::move(d));
}

} // namespace rpomdp
