use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> Vector {
        let mut v = Vector::zeros();
        v[self.index()] = 1.0;
        v
    }

    /// The two remaining axes in cyclic order.
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// One of the six axis-aligned translation directions.
///
/// In an assembly sequence a direction is the part's motion vector while it
/// is being placed: `-z` means the part is lowered into position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub axis: Axis,
    pub sign: Sign,
}

impl Direction {
    pub const POS_X: Direction = Direction::new(Axis::X, Sign::Pos);
    pub const NEG_X: Direction = Direction::new(Axis::X, Sign::Neg);
    pub const POS_Y: Direction = Direction::new(Axis::Y, Sign::Pos);
    pub const NEG_Y: Direction = Direction::new(Axis::Y, Sign::Neg);
    pub const POS_Z: Direction = Direction::new(Axis::Z, Sign::Pos);
    pub const NEG_Z: Direction = Direction::new(Axis::Z, Sign::Neg);

    /// Canonical order: +x, -x, +y, -y, +z, -z.
    pub const ALL: [Direction; 6] = [
        Direction::POS_X,
        Direction::NEG_X,
        Direction::POS_Y,
        Direction::NEG_Y,
        Direction::POS_Z,
        Direction::NEG_Z,
    ];

    pub const fn new(axis: Axis, sign: Sign) -> Self {
        Direction { axis, sign }
    }

    pub fn index(self) -> usize {
        self.axis.index() * 2 + if self.sign == Sign::Pos { 0 } else { 1 }
    }

    pub fn from_index(i: usize) -> Direction {
        Direction::ALL[i]
    }

    pub fn opposite(self) -> Direction {
        Direction::new(self.axis, self.sign.flip())
    }

    pub fn step(self) -> [i64; 3] {
        let mut s = [0; 3];
        s[self.axis.index()] = self.sign.value();
        s
    }

    pub fn vector(self) -> Vector {
        self.axis.unit() * self.sign.value() as f64
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign == Sign::Pos { '+' } else { '-' };
        let a = match self.axis {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        };
        write!(f, "{s}{a}")
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        let (sign, axis) = match (chars.next(), chars.next(), chars.next()) {
            (Some(sign), Some(axis), None) => (sign, axis),
            _ => return Err(format!("bad direction `{s}`")),
        };
        let sign = match sign {
            '+' => Sign::Pos,
            '-' | '−' => Sign::Neg,
            _ => return Err(format!("bad direction sign in `{s}`")),
        };
        let axis = match axis.to_ascii_lowercase() {
            'x' => Axis::X,
            'y' => Axis::Y,
            'z' => Axis::Z,
            _ => return Err(format!("bad direction axis in `{s}`")),
        };
        Ok(Direction::new(axis, sign))
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DisplacementKind {
    Translation,
    Rotation,
}

/// One of the twelve infinitesimal displacements used to probe a contact:
/// translations along and rotations about the three frame axes, in both
/// senses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Displacement {
    pub kind: DisplacementKind,
    pub axis: Axis,
    pub sign: Sign,
}

impl Displacement {
    /// Canonical order: +x, -x, +y, -y, +z, -z, +θx, -θx, +θy, -θy, +θz, -θz.
    pub const ALL: [Displacement; 12] = {
        use Axis::*;
        use DisplacementKind::*;
        use Sign::*;
        [
            Displacement { kind: Translation, axis: X, sign: Pos },
            Displacement { kind: Translation, axis: X, sign: Neg },
            Displacement { kind: Translation, axis: Y, sign: Pos },
            Displacement { kind: Translation, axis: Y, sign: Neg },
            Displacement { kind: Translation, axis: Z, sign: Pos },
            Displacement { kind: Translation, axis: Z, sign: Neg },
            Displacement { kind: Rotation, axis: X, sign: Pos },
            Displacement { kind: Rotation, axis: X, sign: Neg },
            Displacement { kind: Rotation, axis: Y, sign: Pos },
            Displacement { kind: Rotation, axis: Y, sign: Neg },
            Displacement { kind: Rotation, axis: Z, sign: Pos },
            Displacement { kind: Rotation, axis: Z, sign: Neg },
        ]
    };

    pub fn translation(d: Direction) -> Self {
        Displacement {
            kind: DisplacementKind::Translation,
            axis: d.axis,
            sign: d.sign,
        }
    }

    pub fn rotation(axis: Axis, sign: Sign) -> Self {
        Displacement {
            kind: DisplacementKind::Rotation,
            axis,
            sign,
        }
    }

    pub fn index(self) -> usize {
        let base = match self.kind {
            DisplacementKind::Translation => 0,
            DisplacementKind::Rotation => 6,
        };
        base + self.axis.index() * 2 + if self.sign == Sign::Pos { 0 } else { 1 }
    }

    pub fn direction(self) -> Option<Direction> {
        match self.kind {
            DisplacementKind::Translation => Some(Direction::new(self.axis, self.sign)),
            DisplacementKind::Rotation => None,
        }
    }

    pub fn label(self) -> String {
        match self.kind {
            DisplacementKind::Translation => Direction::new(self.axis, self.sign).to_string(),
            DisplacementKind::Rotation => {
                let d = Direction::new(self.axis, self.sign).to_string();
                format!("{}θ{}", &d[..1], &d[1..])
            }
        }
    }
}
