"""Recode the UCI Adult census data (adult.data + adult.test, 48842 rows)
into 15 binary attributes.

usage: python3 recode_adult.py adult.data adult.test > adult.csv
"""
import csv
import sys

FIELDS = ["age", "workclass", "fnlwgt", "education", "education_num", "marital",
          "occupation", "relationship", "race", "sex", "capital_gain",
          "capital_loss", "hours", "country", "income"]
PROF = {"Prof-specialty", "Craft-repair", "Exec-managerial", "Sales"}


def rows(path):
    with open(path) as f:
        for line in f:
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(FIELDS):
                continue
            yield dict(zip(FIELDS, cells))


def recode(r):
    age, edu, hours = int(r["age"]), int(r["education_num"]), int(r["hours"])
    return [
        age < 30,
        age > 60,
        r["workclass"] == "Private",
        r["workclass"].startswith("Self-emp"),
        r["marital"] == "Married-civ-spouse",
        r["workclass"].endswith("-gov"),
        edu > 12,
        edu < 9,
        r["occupation"] in PROF,
        r["race"] == "White",
        r["sex"] == "Male",
        hours > 50,
        hours < 30,
        r["country"] == "United-States",
        r["income"].startswith(">50K"),
    ]


def main():
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["Agelt30", "Agegt60", "Private", "Self_emp", "Married", "Gov",
                  "Education.num.12", "Education.num.9", "Prof", "White", "Male",
                  "Hoursgt50", "Hourslt30", "US", "Class"])
    for path in sys.argv[1:]:
        for r in rows(path):
            out.writerow([int(v) for v in recode(r)])


if __name__ == "__main__":
    main()
