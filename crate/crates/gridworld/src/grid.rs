//! The 4×3 grid: layout, moves and terminal cells.

use std::fmt;

use rewardrig_core::rational::{int, ratio};
use rewardrig_core::Rational;

pub const WIDTH: u8 = 4;
pub const HEIGHT: u8 = 3;
pub const CELLS: usize = WIDTH as usize * HEIGHT as usize;
pub const MAX_STEPS: usize = 10;

pub fn step_cost() -> Rational {
    ratio(-1, 10)
}

pub fn money_bonus() -> Rational {
    int(10)
}

pub fn stethoscope_bonus() -> Rational {
    int(1)
}

/// Row 0 is the northern edge.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x: u8,
    pub y: u8,
}

impl Cell {
    pub const fn new(x: u8, y: u8) -> Self {
        Cell { x, y }
    }

    pub fn index(self) -> usize {
        self.y as usize * WIDTH as usize + self.x as usize
    }

    pub fn from_index(index: usize) -> Self {
        Cell::new((index % WIDTH as usize) as u8, (index / WIDTH as usize) as u8)
    }

    /// `None` when the move leaves the grid.
    pub fn shifted(self, m: Move) -> Option<Cell> {
        let (x, y) = (self.x as i8, self.y as i8);
        let (x, y) = match m {
            Move::North => (x, y - 1),
            Move::South => (x, y + 1),
            Move::East => (x + 1, y),
            Move::West => (x - 1, y),
        };
        let inside = (0..WIDTH as i8).contains(&x) && (0..HEIGHT as i8).contains(&y);
        inside.then(|| Cell::new(x as u8, y as u8))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    North,
    South,
    East,
    West,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::North, Move::South, Move::East, Move::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Move::North => 'N',
            Move::South => 'S',
            Move::East => 'E',
            Move::West => 'W',
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Parent {
    Mother,
    Father,
}

/// What a parent recommends: banker (`R_B`) or doctor (`R_D`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Banker,
    Doctor,
}

impl Answer {
    pub fn letter(self) -> char {
        match self {
            Answer::Banker => 'B',
            Answer::Doctor => 'D',
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Empty,
    Money,
    Stethoscope,
    Parent(Parent),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub start: Cell,
    pub father: Cell,
    pub mother: Cell,
    pub money: Cell,
    pub stethoscope: Cell,
}

impl Default for Layout {
    fn default() -> Self {
        Layout {
            start: Cell::new(1, 1),
            father: Cell::new(0, 1),
            mother: Cell::new(3, 1),
            money: Cell::new(1, 0),
            stethoscope: Cell::new(1, 2),
        }
    }
}

impl Layout {
    pub fn site(&self, cell: Cell) -> Site {
        if cell == self.money {
            Site::Money
        } else if cell == self.stethoscope {
            Site::Stethoscope
        } else if cell == self.mother {
            Site::Parent(Parent::Mother)
        } else if cell == self.father {
            Site::Parent(Parent::Father)
        } else {
            Site::Empty
        }
    }

    pub fn cells(&self) -> [Cell; 5] {
        [self.start, self.father, self.mother, self.money, self.stethoscope]
    }
}
