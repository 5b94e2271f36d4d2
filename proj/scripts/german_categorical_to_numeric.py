#!/usr/bin/env python3
"""Convert the categorical German credit table into the numeric layout.

Input: a CSV with the 20 UCI attributes plus `creditability` (good/bad), as
shipped by several credit-scoring packages. Output: 1000 rows of 24 integer
features followed by the label (1 = good, 2 = bad), whitespace separated.

Ordered categoricals become integer codes following the UCI attribute order;
`purpose` is expanded into five indicator columns.
"""
import argparse
import csv
import sys

CHECKING = {
    "... < 0 DM": 1,
    "0 <= ... < 200 DM": 2,
    "... >= 200 DM / salary assignments for at least 1 year": 3,
    "no checking account": 4,
}
HISTORY = {
    "no credits taken/ all credits paid back duly": 0,
    "all credits at this bank paid back duly": 1,
    "existing credits paid back duly till now": 2,
    "delay in paying off in the past": 3,
    "critical account/ other credits existing (not at this bank)": 4,
}
SAVINGS = {
    "... < 100 DM": 1,
    "100 <= ... < 500 DM": 2,
    "500 <= ... < 1000 DM": 3,
    "... >= 1000 DM": 4,
    "unknown/ no savings account": 5,
}
EMPLOYMENT = {
    "unemployed": 1,
    "... < 1 year": 2,
    "1 <= ... < 4 years": 3,
    "4 <= ... < 7 years": 4,
    "... >= 7 years": 5,
}
PERSONAL = {
    "male : divorced/separated": 1,
    "female : divorced/separated/married": 2,
    "male : single": 3,
    "male : married/widowed": 4,
}
DEBTORS = {"none": 1, "co-applicant": 2, "guarantor": 3}
PROPERTY = {
    "real estate": 1,
    "building society savings agreement/ life insurance": 2,
    "car or other, not in attribute Savings account/bonds": 3,
    "unknown / no property": 4,
}
PLANS = {"bank": 1, "stores": 2, "none": 3}
HOUSING = {"rent": 1, "own": 2, "for free": 3}
JOB = {
    "unemployed/ unskilled - non-resident": 1,
    "unskilled - resident": 2,
    "skilled employee / official": 3,
    "management/ self-employed/ highly qualified employee/ officer": 4,
}
TELEPHONE = {"none": 1, "yes, registered under the customers name": 2}
FOREIGN = {"yes": 1, "no": 2}
LABEL = {"good": 1, "bad": 2}
PURPOSE_INDICATORS = ["car (new)", "car (used)", "furniture/equipment",
                      "radio/television", "business"]


def convert(row):
    features = [
        CHECKING[row["status_of_existing_checking_account"]],
        int(row["duration_in_month"]),
        HISTORY[row["credit_history"]],
        int(round(int(row["credit_amount"]) / 100.0)),
        SAVINGS[row["savings_account_and_bonds"]],
        EMPLOYMENT[row["present_employment_since"]],
        int(row["installment_rate_in_percentage_of_disposable_income"]),
        PERSONAL[row["personal_status_and_sex"]],
        DEBTORS[row["other_debtors_or_guarantors"]],
        int(row["present_residence_since"]),
        PROPERTY[row["property"]],
        int(row["age_in_years"]),
        PLANS[row["other_installment_plans"]],
        HOUSING[row["housing"]],
        int(row["number_of_existing_credits_at_this_bank"]),
        JOB[row["job"]],
        int(row["number_of_people_being_liable_to_provide_maintenance_for"]),
        TELEPHONE[row["telephone"]],
        FOREIGN[row["foreign_worker"]],
    ]
    features += [int(row["purpose"] == p) for p in PURPOSE_INDICATORS]
    assert len(features) == 24
    return features + [LABEL[row["creditability"]]]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input")
    parser.add_argument("output")
    args = parser.parse_args()
    with open(args.input, newline="") as f:
        rows = [convert(r) for r in csv.DictReader(f)]
    if len(rows) != 1000:
        sys.exit(f"expected 1000 rows, got {len(rows)}")
    with open(args.output, "w") as f:
        for r in rows:
            f.write("".join(f"{v:4d}" for v in r) + " \n")


if __name__ == "__main__":
    main()
