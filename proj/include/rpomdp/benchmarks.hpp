#pragma once

// Slippery grid-world and maze generators.

#include "rpomdp/model.hpp"

#include <cstddef>
#include <vector>

namespace rpomdp {

/// Column x (west to east) and row y (north to south).
struct Cell {
    std::size_t x = 0;
    std::size_t y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Action indices shared by both generators.
enum Move : ActionId { North = 0, East = 1, South = 2, West = 3 };

/// Cell (x, y) is state y * width + x. State width*height is the placement
/// state, which moves to every safe cell with equal probability; state
/// width*height + 1 is an absorbing sink that traps lead into. The target
/// (north-east corner) is absorbing and labelled `target`.
///
/// The intended neighbour is reached with probability in `slip`; each of the
/// two lateral neighbours gets the interval [(1-hi)/2, (1-lo)/2]. Moves into
/// a wall keep the robot in place. Observations are the local wall pattern;
/// placement, target and trap/sink states have their own observations.
IntervalPomdp gen_grid(std::size_t width, std::size_t height, Interval slip,
                       const std::vector<Cell>& traps);

/// Trap cells of the default 4x4 grid.
std::vector<Cell> default_grid_traps();

/// Default 4x4 grid: 18 states.
IntervalPomdp gen_grid(Interval slip);

/// Corridor of 15 cells along the top with seven dead-end shafts of depth 2
/// hanging below columns 2, 4, ..., 14, plus a placement state: 30 states.
/// The goal (labelled `goal`) is the bottom of the eastern shaft. The
/// placement state moves to each non-goal cell with equal
/// probability. Each step costs 1; a move succeeds with probability in
/// `slip` and otherwise leaves the robot in place. Observations are wall
/// patterns; the goal and placement states have their own.
IntervalPomdp gen_maze(Interval slip);

/// Corridor cell (x, 0) is state x; shaft cell (x, d) is 15 + 2*(x/2 - 1) + d - 1.
/// Throws ContractViolation for a cell outside the maze.
StateId maze_state(Cell cell);
inline constexpr StateId kMazeGoal = 28;
inline constexpr StateId kMazePlacement = 29;

} // namespace rpomdp
